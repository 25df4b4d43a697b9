//! Monte Carlo study of `2 log GLR` under repeated binomial sampling.
//!
//! Two limits are known in closed form and offered as [`LimitSpec`] constructors:
//! a true value on the common boundary of two half-lines gives a signed `χ²₁`
//! mixture, and a point hypothesis against its complement gives `−χ²₁`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};
use crate::likelihood::{glr, sup_log_lik, Favors, LikelihoodModel, NEUTRAL_LOG_TOL};
use crate::models::{BinomialData, BinomialModel};
use crate::optimize::OptimizerConfig;
use crate::predicate::parse_region;
use crate::region::{Interval, ParameterSpace, Region};

/// Probabilities reported in [`EmpiricalDistribution::quantiles`].
pub const QUANTILE_LEVELS: [f64; 9] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

/// Largest tolerated share of failed replications.
pub const MAX_FAILURE_RATE: f64 = 1e-3;

/// Repeated binomial experiments with true success probability `theta0`.
///
/// Hypotheses are predicates over the parameter `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub theta0: f64,
    pub h1: String,
    pub h2: String,
    pub sample_sizes: Vec<u64>,
    pub replications: usize,
    pub seed: u64,
}

fn binomial_space() -> ParameterSpace {
    ParameterSpace::scalar("theta", Interval::closed(0.0, 1.0)).expect("valid space")
}

impl SimulationConfig {
    /// Boundary case: `θ₀ = 0.2` on the edge of both `θ ≤ 0.2` and `θ > 0.2`.
    pub fn boundary(n: u64, replications: usize, seed: u64) -> Self {
        SimulationConfig {
            theta0: 0.2,
            h1: "theta <= 0.2".into(),
            h2: "theta > 0.2".into(),
            sample_sizes: vec![n],
            replications,
            seed,
        }
    }

    /// Point hypothesis `θ = θ₀` against its complement.
    pub fn point_null(theta0: f64, n: u64, replications: usize, seed: u64) -> Self {
        SimulationConfig {
            theta0,
            h1: format!("theta == {theta0}"),
            h2: format!("not(theta == {theta0})"),
            sample_sizes: vec![n],
            replications,
            seed,
        }
    }

    /// `θ ≤ 0.2` against `θ > 0.2` at an interior true value.
    pub fn consistency(theta0: f64, sample_sizes: Vec<u64>, replications: usize, seed: u64) -> Self {
        SimulationConfig {
            theta0,
            h1: "theta <= 0.2".into(),
            h2: "theta > 0.2".into(),
            sample_sizes,
            replications,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta0) {
            return Err(Error::InvalidArgument(format!(
                "true value {} outside [0, 1]",
                self.theta0
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("need at least one replication".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::InvalidArgument("sample sizes must be positive".into()));
        }
        self.regions().map(|_| ())
    }

    pub fn regions(&self) -> Result<(Region, Region)> {
        let space = binomial_space();
        Ok((parse_region(&self.h1, &space)?, parse_region(&self.h2, &space)?))
    }
}

/// Sorted draws of `2 log GLR` with summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    pub n: u64,
    #[serde(skip)]
    pub values: Vec<f64>,
    /// `(level, value)` pairs at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(f64, f64)>,
    /// Share of strictly positive values.
    pub fraction_positive: f64,
    pub median: f64,
    pub failures: usize,
}

impl EmpiricalDistribution {
    pub fn from_values(n: u64, mut values: Vec<f64>, failures: usize) -> Self {
        values.sort_by(f64::total_cmp);
        let mut data = Data::new(values.clone());
        let quantiles = QUANTILE_LEVELS.iter().map(|&p| (p, data.quantile(p))).collect();
        let median = data.median();
        let fraction_positive = values.iter().filter(|&&v| v > 0.0).count() as f64 / values.len().max(1) as f64;
        EmpiricalDistribution {
            n,
            values,
            quantiles,
            fraction_positive,
            median,
            failures,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw values as CSV with header `two_log_glr`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("two_log_glr\n");
        for v in &self.values {
            out.push_str(&crate::serde_ext::format_sig(*v, 12));
            out.push('\n');
        }
        out
    }
}

fn replication_rng(seed: u64, n: u64, idx: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(idx as u64);
    rng
}

/// Draws `replications` binomial samples of size `n` and records `2 log GLR` for each.
///
/// Every replication has its own random stream, so results do not depend on
/// thread scheduling.
pub fn simulate_glr(cfg: &SimulationConfig, n: u64, opt: &OptimizerConfig) -> Result<EmpiricalDistribution> {
    cfg.validate()?;
    let (h1, h2) = cfg.regions()?;
    let dist = Binomial::new(n, cfg.theta0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let outcomes: Vec<Option<f64>> = (0..cfg.replications)
        .into_par_iter()
        .map(|idx| {
            let mut rng = replication_rng(cfg.seed, n, idx);
            let x = dist.sample(&mut rng);
            let model = BinomialModel::new(BinomialData::new(x, n).ok()?);
            let r = glr(&model, &h1, &h2, opt).ok()?;
            (!r.log_glr.is_nan()).then_some(2.0 * r.log_glr)
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    if failures as f64 > MAX_FAILURE_RATE * cfg.replications as f64 {
        return Err(Error::SimulationFailures {
            failed: failures,
            total: cfg.replications,
        });
    }
    Ok(EmpiricalDistribution::from_values(
        n,
        outcomes.into_iter().flatten().collect(),
        failures,
    ))
}

/// Behaviour of the GLR itself when it does not settle to a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    Infinity,
    Zero,
}

/// Limit law of `2 log GLR`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitSpec {
    /// `+χ²_df` with weight `w_plus`, `−χ²_df` with weight `w_minus`.
    SignedChisqMixture {
        w_plus: f64,
        w_minus: f64,
        df: u32,
    },
    NegChisq {
        df: u32,
    },
    Divergent {
        to: Divergence,
    },
}

impl LimitSpec {
    pub fn boundary() -> Self {
        LimitSpec::SignedChisqMixture {
            w_plus: 0.5,
            w_minus: 0.5,
            df: 1,
        }
    }

    pub fn point_null(dim: u32) -> Self {
        LimitSpec::NegChisq { df: dim }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LimitSpec::SignedChisqMixture { w_plus, w_minus, df } => {
                if df == 0 || !(w_plus >= 0.0 && w_minus >= 0.0) || (w_plus + w_minus - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(
                        "mixture weights must be non-negative and sum to 1, df >= 1".into(),
                    ));
                }
            }
            LimitSpec::NegChisq { df: 0 } => {
                return Err(Error::InvalidArgument("degrees of freedom must be at least 1".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

fn chisq_cdf(df: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    ChiSquared::new(df as f64).expect("df >= 1").cdf(x)
}

/// `P(−χ²_df ≤ x)`.
fn neg_chisq_cdf(df: u32, x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        1.0 - chisq_cdf(df, -x)
    }
}

/// Distribution function of the limit law at `x`.
pub fn limit_cdf(spec: &LimitSpec, x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    match *spec {
        LimitSpec::SignedChisqMixture { w_plus, w_minus, df } => {
            w_minus * neg_chisq_cdf(df, x) + w_plus * chisq_cdf(df, x)
        }
        LimitSpec::NegChisq { df } => neg_chisq_cdf(df, x),
        LimitSpec::Divergent {
            to: Divergence::Infinity,
        } => {
            if x == f64::INFINITY {
                1.0
            } else {
                0.0
            }
        }
        LimitSpec::Divergent { to: Divergence::Zero } => 1.0,
    }
}

/// Kolmogorov–Smirnov distance between the sample and the limit law.
///
/// Both one-sided limits of the empirical CDF are compared at every distinct sample value.
pub fn ks_distance(e: &EmpiricalDistribution, spec: &LimitSpec) -> Result<f64> {
    spec.validate()?;
    let r = e.values.len();
    if r < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 values for a KS distance, got {r}"
        )));
    }
    let total = r as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < r {
        let x = e.values[i];
        let mut j = i;
        while j + 1 < r && e.values[j + 1] == x {
            j += 1;
        }
        let f = limit_cdf(spec, x);
        let below = i as f64 / total;
        let upto = (j + 1) as f64 / total;
        d = d.max((f - below).abs()).max((upto - f).abs());
        i = j + 1;
    }
    Ok(d)
}

/// `θ ↦ θ₀ ln θ + (1 − θ₀) ln(1 − θ)`, the limiting per-observation log-likelihood.
struct ExpectedLogLik {
    theta0: f64,
    space: ParameterSpace,
}

impl LikelihoodModel for ExpectedLogLik {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }
    fn log_lik(&self, p: &[f64]) -> f64 {
        let t = p[0];
        let term = |w: f64, q: f64| if w == 0.0 { 0.0 } else { w * q.ln() };
        term(self.theta0, t) + term(1.0 - self.theta0, 1.0 - t)
    }
}

/// Medians of `log GLR` across sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub sample_sizes: Vec<u64>,
    pub medians: Vec<f64>,
    /// Region with the larger limiting supremum.
    pub predicted: Favors,
    /// Medians strictly increase (`H1`), strictly decrease (`H2`), or all vanish (`Neither`).
    pub monotone: bool,
}

/// Runs the simulation at each sample size and checks the medians trend toward the
/// region with the larger limiting supremum.
pub fn consistency_trend(cfg: &SimulationConfig, opt: &OptimizerConfig) -> Result<ConsistencyReport> {
    cfg.validate()?;
    let (h1, h2) = cfg.regions()?;
    let limit = ExpectedLogLik {
        theta0: cfg.theta0,
        space: binomial_space(),
    };
    let l1 = sup_log_lik(&limit, &h1, opt)?.max_value;
    let l2 = sup_log_lik(&limit, &h2, opt)?.max_value;
    let predicted = Favors::from_log_ratio(l1 - l2);

    let mut medians = Vec::with_capacity(cfg.sample_sizes.len());
    for &n in &cfg.sample_sizes {
        medians.push(0.5 * simulate_glr(cfg, n, opt)?.median);
    }
    let monotone = match predicted {
        Favors::H1 => medians.windows(2).all(|w| w[1] > w[0]),
        Favors::H2 => medians.windows(2).all(|w| w[1] < w[0]),
        Favors::Neither => medians.iter().all(|m| m.abs() <= NEUTRAL_LOG_TOL),
    };
    Ok(ConsistencyReport {
        sample_sizes: cfg.sample_sizes.clone(),
        medians,
        predicted,
        monotone,
    })
}
