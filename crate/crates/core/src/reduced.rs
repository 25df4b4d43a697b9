//! Evidence when only a test decision or a p-value is available.
//!
//! The test `T` rejects `H1` when `T = 1`, and its power function is
//! `π(θ) = P_θ(T = 1)`. The reduced-data GLR is
//!
//! ```text
//! r_T(t) = sup_{H2} P_θ(T = t) / sup_{H1} P_θ(T = t)
//! ```
//!
//! so values above 1 favor `H2`, the alternative. For a p-value `U` from a
//! normal shift family the same construction uses the density of `U`.
//!
//! Two-sided p-values are handled by the general form with sign regions. The
//! variants that condition on the sign of the estimate (`r₊`, `r₋`) are not offered:
//! each discards the information in the sign and their evidential reading is not
//! well defined.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::likelihood::{Favors, Strength};
use crate::region::{Interval, ScalarRegion};

/// Power functions with the shapes for which `r_T` has a closed form, and a tabulated curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerFunction {
    /// `H1: θ ≤ θ*` against `H2: θ > θ*`, power increasing from 0 to 1 with `π(θ*) = α`.
    OneSided { alpha: f64 },
    /// `H1: θ = θ*` against `H2: θ > θ*`.
    PointNullOneSided { alpha: f64 },
    /// `H1: θ = θ*` against `H2: θ ≠ θ*`.
    TwoSidedPointNull { alpha: f64 },
    /// `H1`: non-equivalence against `H2`: equivalence, with `π ≤ α` on `H1` and maximum power `pi_max`.
    Equivalence { alpha: f64, pi_max: f64 },
    /// Power `power[i]` at `theta[i]`, interpolated linearly; regions are read within the grid range.
    Tabulated {
        theta: Vec<f64>,
        power: Vec<f64>,
        h1: ScalarRegion,
        h2: ScalarRegion,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestOutcome {
    /// `T = 0`
    Accept,
    /// `T = 1`
    Reject,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("size must lie in (0, 1), got {alpha}")))
    }
}

impl PowerFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            PowerFunction::OneSided { alpha }
            | PowerFunction::PointNullOneSided { alpha }
            | PowerFunction::TwoSidedPointNull { alpha } => check_alpha(*alpha),
            PowerFunction::Equivalence { alpha, pi_max } => {
                check_alpha(*alpha)?;
                if *pi_max > *alpha && *pi_max <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "maximum power must lie in (alpha, 1], got {pi_max}"
                    )))
                }
            }
            PowerFunction::Tabulated { theta, power, h1, h2 } => {
                if theta.len() < 2 || theta.len() != power.len() {
                    return Err(Error::InvalidArgument(
                        "tabulated power needs matching grids of length >= 2".into(),
                    ));
                }
                if theta.iter().any(|t| !t.is_finite()) || theta.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidArgument(
                        "tabulated grid must be finite and strictly increasing".into(),
                    ));
                }
                if power.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::InvalidArgument(
                        "tabulated power values must lie in [0, 1]".into(),
                    ));
                }
                let range = Interval::closed(theta[0], theta[theta.len() - 1]);
                for (name, h) in [("H1", h1), ("H2", h2)] {
                    if h.closure().intervals().iter().all(|iv| iv.intersect(&range).is_none()) {
                        return Err(Error::InvalidArgument(format!("tabulated grid does not cover {name}")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Extremes of the piecewise-linear interpolant over the closure of `region`, clipped to the grid.
fn power_range(theta: &[f64], power: &[f64], region: &ScalarRegion) -> (f64, f64) {
    let range = Interval::closed(theta[0], theta[theta.len() - 1]);
    let interp = |x: f64| -> f64 {
        let j = theta.partition_point(|&t| t <= x).clamp(1, theta.len() - 1);
        let (t0, t1) = (theta[j - 1], theta[j]);
        let w = ((x - t0) / (t1 - t0)).clamp(0.0, 1.0);
        power[j - 1] + w * (power[j] - power[j - 1])
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for iv in region.closure().intervals() {
        let Some(piece) = iv.intersect(&range) else { continue };
        let inner = theta
            .iter()
            .zip(power)
            .filter(|(t, _)| piece.contains(**t))
            .map(|(_, p)| *p);
        for p in inner.chain([interp(piece.lo), interp(piece.hi)]) {
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    (lo, hi)
}

/// Reduced-data GLR `r_T(t)`; values above 1 favor `H2`.
pub fn glr_from_test(pf: &PowerFunction, t: TestOutcome) -> Result<f64> {
    pf.validate()?;
    Ok(match (pf, t) {
        (PowerFunction::OneSided { alpha }, TestOutcome::Accept) => 1.0 - alpha,
        (PowerFunction::OneSided { alpha }, TestOutcome::Reject) => 1.0 / alpha,
        (PowerFunction::PointNullOneSided { .. }, TestOutcome::Accept) => 1.0,
        (PowerFunction::PointNullOneSided { alpha }, TestOutcome::Reject) => 1.0 / alpha,
        (PowerFunction::TwoSidedPointNull { .. }, TestOutcome::Accept) => 1.0,
        (PowerFunction::TwoSidedPointNull { alpha }, TestOutcome::Reject) => 1.0 / alpha,
        (PowerFunction::Equivalence { alpha, .. }, TestOutcome::Accept) => 1.0 - alpha,
        (PowerFunction::Equivalence { alpha, pi_max }, TestOutcome::Reject) => pi_max / alpha,
        (PowerFunction::Tabulated { theta, power, h1, h2 }, t) => {
            let (lo1, hi1) = power_range(theta, power, h1);
            let (lo2, hi2) = power_range(theta, power, h2);
            match t {
                TestOutcome::Reject => hi2 / hi1,
                TestOutcome::Accept => (1.0 - lo2) / (1.0 - lo1),
            }
        }
    })
}

fn check_pvalue(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p-value must lie in (0, 1), got {u}")))
    }
}

fn inverse_cdf(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// GLR of `μ > 0` over `μ ≤ 0` from a one-sided normal p-value:
/// `exp(q²/2)` for `u ≤ 0.5` and `exp(−q²/2)` otherwise, `q = Φ⁻¹(1 − u)`.
pub fn glr_from_pvalue_normal(u: f64) -> Result<f64> {
    check_pvalue(u)?;
    let q = inverse_cdf(1.0 - u);
    let half = 0.5 * q * q;
    Ok(if u <= 0.5 { half.exp() } else { (-half).exp() })
}

fn check_sign_region(name: &str, h: &ScalarRegion) -> Result<()> {
    let ok = !h.is_empty()
        && h.intervals()
            .iter()
            .all(|iv| [iv.lo, iv.hi].iter().all(|&e| e == 0.0 || e.is_infinite()));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be a non-empty union of sign regions with endpoints at 0 or infinity"
        )))
    }
}

fn distance_to(q: f64, h: &ScalarRegion) -> f64 {
    h.closure()
        .intervals()
        .iter()
        .map(|iv| {
            if q < iv.lo {
                iv.lo - q
            } else if q > iv.hi {
                q - iv.hi
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// GLR of `h2` over `h1` from a p-value `u = 1 − Φ(V)`, `V ~ N(s, 1)`, with the
/// hypotheses given as sign regions for the standardized shift `s`.
///
/// The density of `u` is `φ(q − s)/φ(q)` with `q = Φ⁻¹(1 − u)`, so each supremum
/// is attained at the point of the region nearest to `q`.
pub fn glr_from_pvalue_general(u: f64, h1: &ScalarRegion, h2: &ScalarRegion) -> Result<f64> {
    check_pvalue(u)?;
    check_sign_region("H1", h1)?;
    check_sign_region("H2", h2)?;
    let q = inverse_cdf(1.0 - u);
    let (d1, d2) = (distance_to(q, h1), distance_to(q, h2));
    Ok((0.5 * (d1 * d1 - d2 * d2)).exp())
}

/// Reduced-data GLR with its reading; `glr` is the ratio for `H2` over `H1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedEvidence {
    pub glr: f64,
    pub direction: Favors,
    /// Benchmark label (8 and 32); descriptive only.
    pub strength_label: Strength,
}

impl ReducedEvidence {
    pub fn new(glr_h2_over_h1: f64) -> Self {
        let l = glr_h2_over_h1.ln();
        ReducedEvidence {
            glr: glr_h2_over_h1,
            direction: Favors::from_log_ratio(-l),
            strength_label: Strength::from_log_ratio(l),
        }
    }
}
