//! Numerical kernels: scalar maximization, box maximization and bisection.
//!
//! Everything maximizes (log-likelihoods), works on closed intervals/boxes whose
//! endpoints may be infinite, and tolerates `-inf` at the boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Interval;
use crate::serde_ext::extended_real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub abs_tol_x: f64,
    pub abs_tol_f: f64,
    /// Iteration cap for one local search. Box searches get `max_iters * dim`.
    pub max_iters: usize,
    pub multistart_count: usize,
    /// Seed for the random multistart points of [`maximize_box`].
    pub seed: u64,
    /// Resolution of grid scans (support sets, superset checks).
    pub grid_points: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            abs_tol_x: 1e-10,
            abs_tol_f: 1e-12,
            max_iters: 500,
            multistart_count: 8,
            seed: 0x5eed_0f11,
            grid_points: 2001,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol_x > 0.0 && self.abs_tol_f > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_iters < 1 || self.multistart_count < 1 {
            return Err(Error::InvalidArgument(
                "max_iters and multistart_count must be at least 1".into(),
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidArgument("grid_points must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxResult {
    pub argmax: Vec<f64>,
    #[serde(serialize_with = "extended_real")]
    pub max_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// False when the supremum is only approached (excluded endpoint, or at infinity).
    pub attained: bool,
}

/// Finite-or-`-inf` view of an objective value; NaN counts as `-inf`.
fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maps `t ∈ [0, 1]` onto a (possibly infinite) interval.
fn unit_to_interval(iv: &Interval, t: f64) -> f64 {
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => {
            if t >= 1.0 {
                iv.hi
            } else {
                iv.lo + t * (iv.hi - iv.lo)
            }
        }
        (true, false) => {
            if t >= 1.0 {
                f64::INFINITY
            } else {
                iv.lo + t / (1.0 - t)
            }
        }
        (false, true) => {
            if t <= 0.0 {
                f64::NEG_INFINITY
            } else {
                iv.hi - (1.0 - t) / t
            }
        }
        (false, false) => {
            if t <= 0.0 {
                f64::NEG_INFINITY
            } else if t >= 1.0 {
                f64::INFINITY
            } else {
                (t - 0.5) / (t * (1.0 - t))
            }
        }
    }
}

struct LocalMax {
    x: f64,
    fx: f64,
    iterations: usize,
    converged: bool,
}

/// Brent's golden-section / parabolic-interpolation search for a maximum on `[a, b]`.
fn brent_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64, max_iters: usize) -> LocalMax {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let eps = f64::EPSILON.sqrt();
    // minimize h = -f
    let h = |x: f64| -clean(f(x));

    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = h(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for iter in 0..max_iters {
        let xm = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            return LocalMax {
                x,
                fx: -fx,
                iterations: iter,
                converged: true,
            };
        }
        let mut golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = h(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    LocalMax {
        x,
        fx: -fx,
        iterations: max_iters,
        converged: false,
    }
}

/// Maximizes a scalar function over the closed interval spanned by `interval`.
///
/// A grid of `multistart_count + 1` seeds (including both endpoints) is evaluated;
/// each grid-local maximum is refined with Brent's method on its neighbouring
/// cells. Infinite endpoints are reached through a monotone change of variable
/// and count as `-inf`.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, interval: &Interval, cfg: &OptimizerConfig) -> Result<MaxResult> {
    if interval.is_empty() || interval.lo.is_nan() || interval.hi.is_nan() {
        return Err(Error::InvalidArgument(format!("cannot maximize over {interval}")));
    }
    let iv = interval.closure();
    if iv.lo == iv.hi {
        let v = clean(f(iv.lo));
        if v == f64::NEG_INFINITY {
            return Err(Error::NoFiniteValue);
        }
        return Ok(MaxResult {
            argmax: vec![iv.lo],
            max_value: v,
            iterations: 0,
            converged: true,
            attained: true,
        });
    }

    let m = cfg.multistart_count.max(2);
    let xs: Vec<f64> = (0..=m).map(|j| unit_to_interval(&iv, j as f64 / m as f64)).collect();
    let fs: Vec<f64> = xs
        .iter()
        .map(|&x| if x.is_finite() { clean(f(x)) } else { f64::NEG_INFINITY })
        .collect();

    let mut best_x = f64::NAN;
    let mut best_f = f64::NEG_INFINITY;
    let mut best_converged = true;
    let mut iterations = 0;
    for (&x, &fx) in xs.iter().zip(&fs) {
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    if best_f == f64::NEG_INFINITY {
        return Err(Error::NoFiniteValue);
    }
    let mut attained = true;

    for j in 0..=m {
        let left = if j > 0 { fs[j - 1] } else { f64::NEG_INFINITY };
        let right = if j < m { fs[j + 1] } else { f64::NEG_INFINITY };
        if !(fs[j] >= left && fs[j] >= right) || fs[j] == f64::NEG_INFINITY {
            continue;
        }
        let lo_idx = j.saturating_sub(1);
        let hi_idx = (j + 1).min(m);
        let (mut a, mut b) = (xs[lo_idx], xs[hi_idx]);
        if !a.is_finite() {
            match expand_bracket(&f, xs[j], -1.0, cfg) {
                Bracket::Finite(edge) => a = edge,
                Bracket::Unbounded(x, fx) => {
                    if fx > best_f {
                        best_x = x;
                        best_f = fx;
                        attained = false;
                    }
                    continue;
                }
            }
        }
        if !b.is_finite() {
            match expand_bracket(&f, xs[j], 1.0, cfg) {
                Bracket::Finite(edge) => b = edge,
                Bracket::Unbounded(x, fx) => {
                    if fx > best_f {
                        best_x = x;
                        best_f = fx;
                        attained = false;
                    }
                    continue;
                }
            }
        }
        let local = brent_max(&f, a, b, cfg.abs_tol_x, cfg.max_iters);
        iterations += local.iterations;
        if local.fx > best_f {
            best_x = local.x;
            best_f = local.fx;
            best_converged = local.converged;
            attained = true;
        }
    }

    if !best_converged {
        return Err(Error::NotConverged {
            iterations,
            best_value: best_f,
            best_point: vec![best_x],
        });
    }
    Ok(MaxResult {
        argmax: vec![best_x],
        max_value: best_f,
        iterations,
        converged: true,
        attained,
    })
}

enum Bracket {
    Finite(f64),
    /// The function kept increasing towards infinity; best point seen.
    Unbounded(f64, f64),
}

/// Steps outward from `x0` in direction `dir` with doubling steps until `f` drops.
fn expand_bracket<F: Fn(f64) -> f64>(f: &F, x0: f64, dir: f64, cfg: &OptimizerConfig) -> Bracket {
    let mut step = x0.abs().max(1.0);
    let (mut x, mut fx) = (x0, clean(f(x0)));
    for _ in 0..cfg.max_iters.min(1000) {
        let xn = x0 + dir * step;
        let fnext = clean(f(xn));
        if fnext < fx || !xn.is_finite() {
            return Bracket::Finite(xn);
        }
        x = xn;
        fx = fnext;
        step *= 2.0;
    }
    Bracket::Unbounded(x, fx)
}

/// Maximizes `f` over a closed box by Nelder–Mead from several seeds.
///
/// Trial points are projected onto the box. The first seed is `start` when given;
/// the remaining seeds are drawn deterministically from `cfg.seed`. A one-dimensional
/// box is handed to [`maximize_1d`].
pub fn maximize_box<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[Interval],
    start: Option<&[f64]>,
    cfg: &OptimizerConfig,
) -> Result<MaxResult> {
    let dim = bounds.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("box has no dimensions".into()));
    }
    if let Some(s) = start {
        if s.len() != dim {
            return Err(Error::InvalidArgument("start point dimension mismatch".into()));
        }
    }
    let bounds: Vec<Interval> = bounds.iter().map(Interval::closure).collect();
    if bounds.iter().any(Interval::is_empty) {
        return Err(Error::InvalidArgument("empty box".into()));
    }
    if dim == 1 {
        return maximize_1d(|x| f(&[x]), &bounds[0], cfg);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seeds: Vec<Vec<f64>> = Vec::with_capacity(cfg.multistart_count);
    if let Some(s) = start {
        seeds.push(project(s, &bounds));
    }
    while seeds.len() < cfg.multistart_count {
        let seed: Vec<f64> = bounds
            .iter()
            .enumerate()
            .map(|(i, iv)| {
                let centre = start.map_or(0.0, |s| s[i]);
                let scale = centre.abs().max(1.0);
                match (iv.lo.is_finite(), iv.hi.is_finite()) {
                    (true, true) => rng.random_range(iv.lo..=iv.hi),
                    (true, false) => iv.lo + scale * rng.random::<f64>() * 4.0,
                    (false, true) => iv.hi - scale * rng.random::<f64>() * 4.0,
                    (false, false) => centre + scale * rng.sample::<f64, _>(StandardNormal),
                }
            })
            .collect();
        seeds.push(seed);
    }

    let fclean = |x: &[f64]| clean(f(x));
    let mut best: Option<MaxResult> = None;
    let mut total_iters = 0;
    for seed in seeds {
        let mut res = nelder_mead(&fclean, &seed, &bounds, cfg);
        // Restart from the incumbent until a fresh simplex no longer improves it.
        for _ in 0..4 {
            if !res.converged || res.max_value == f64::NEG_INFINITY {
                break;
            }
            let again = nelder_mead(&fclean, &res.argmax, &bounds, cfg);
            let improved = again.max_value > res.max_value + cfg.abs_tol_f;
            let it = res.iterations + again.iterations;
            if again.max_value >= res.max_value {
                res = again;
            }
            res.iterations = it;
            if !improved {
                break;
            }
        }
        total_iters += res.iterations;
        if best.as_ref().is_none_or(|b| res.max_value > b.max_value) {
            best = Some(res);
        }
    }
    let mut best = best.expect("at least one seed");
    best.iterations = total_iters;
    if best.max_value == f64::NEG_INFINITY {
        return Err(Error::NoFiniteValue);
    }
    if !best.converged {
        return Err(Error::NotConverged {
            iterations: total_iters,
            best_value: best.max_value,
            best_point: best.argmax,
        });
    }
    Ok(best)
}

fn project(x: &[f64], bounds: &[Interval]) -> Vec<f64> {
    x.iter().zip(bounds).map(|(&v, iv)| v.clamp(iv.lo, iv.hi)).collect()
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], bounds: &[Interval], cfg: &OptimizerConfig) -> MaxResult {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = x0.len();
    let max_iters = cfg.max_iters * dim;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let x0 = project(x0, bounds);
    simplex.push((x0.clone(), f(&x0)));
    for i in 0..dim {
        let iv = &bounds[i];
        let mut step = if iv.lo.is_finite() && iv.hi.is_finite() {
            0.1 * (iv.hi - iv.lo)
        } else {
            0.1 * x0[i].abs().max(1.0)
        };
        if x0[i] + step > iv.hi {
            step = -step;
        }
        let mut x = x0.clone();
        x[i] += step;
        let x = project(&x, bounds);
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        // descending by value: best first
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diameter < cfg.abs_tol_x {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            let p: Vec<f64> = centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect();
            project(&p, bounds)
        };

        let xr = along(REFLECT);
        let fr = f(&xr);
        if fr > simplex[0].1 {
            let xe = along(EXPAND);
            let fe = f(&xe);
            simplex[dim] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        // outside contraction if the reflection beat the worst vertex, inside otherwise
        let (t, floor) = if fr > worst.1 {
            (CONTRACT, fr)
        } else {
            (-CONTRACT, worst.1)
        };
        let xc = along(t);
        let fc = f(&xc);
        if fc > floor || (t > 0.0 && fc == floor) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            let p: Vec<f64> = best.iter().zip(x.iter()).map(|(b, v)| b + SHRINK * (v - b)).collect();
            *x = project(&p, bounds);
            *fx = f(x);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (argmax, max_value) = simplex.swap_remove(0);
    MaxResult {
        argmax,
        max_value,
        iterations,
        converged,
        attained: true,
    }
}

/// Bisection for a root of `g` on `[a, b]`; returns the midpoint of the final bracket.
pub fn find_root_1d<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, cfg: &OptimizerConfig) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidArgument(format!("bad bracket [{a}, {b}]")));
    }
    let (ga, gb) = (g(a), g(b));
    if ga.is_nan() || gb.is_nan() || (ga > 0.0 && gb > 0.0) || (ga < 0.0 && gb < 0.0) {
        return Err(Error::InvalidBracket { a, b, ga, gb });
    }
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    let (mut lo, mut hi) = (a, b);
    let lo_negative = ga < 0.0;
    // Enough halvings to exhaust double precision on any finite bracket.
    for _ in 0..2100 {
        if hi - lo <= cfg.abs_tol_x {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn binom(t: f64) -> f64 {
        // 9 successes out of 17, 0 ln 0 := 0 is irrelevant here
        9.0 * t.ln() + 8.0 * (1.0 - t).ln()
    }

    #[test]
    fn binomial_mle_on_unit_interval() {
        let cfg = OptimizerConfig::default();
        let r = maximize_1d(binom, &Interval::closed(0.0, 1.0), &cfg).unwrap();
        assert!((r.argmax[0] - 9.0 / 17.0).abs() < 1e-8, "{:?}", r);
        assert!((r.max_value - binom(9.0 / 17.0)).abs() < 1e-12);
        assert!(r.converged && r.attained);
    }

    #[test]
    fn monotone_piece_hits_endpoint() {
        let cfg = OptimizerConfig::default();
        let r = maximize_1d(binom, &Interval::closed(0.0, 0.2), &cfg).unwrap();
        assert_eq!(r.argmax[0], 0.2);
        // 9 ln 0.2 + 8 ln 0.8
        assert!((r.max_value - (-16.270_089_622_420_578)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval_returns_the_point() {
        let cfg = OptimizerConfig::default();
        let r = maximize_1d(binom, &Interval::point(0.5294), &cfg).unwrap();
        assert_eq!(r.argmax, vec![0.5294]);
        assert_eq!(r.max_value, binom(0.5294));
    }

    #[test]
    fn all_neg_inf_is_an_error() {
        let cfg = OptimizerConfig::default();
        assert_eq!(
            maximize_1d(|_| f64::NEG_INFINITY, &Interval::closed(0.0, 1.0), &cfg),
            Err(Error::NoFiniteValue)
        );
        assert_eq!(
            maximize_1d(|_| f64::NAN, &Interval::point(0.0), &cfg),
            Err(Error::NoFiniteValue)
        );
    }

    #[test]
    fn unbounded_intervals() {
        let cfg = OptimizerConfig::default();
        let r = maximize_1d(|x| -(x - 37.5).powi(2), &Interval::real_line(), &cfg).unwrap();
        assert!((r.argmax[0] - 37.5).abs() < 1e-6);
        let r = maximize_1d(
            |x| -(x + 3.0).powi(2),
            &Interval::new(-1.0, f64::INFINITY, true, false),
            &cfg,
        )
        .unwrap();
        assert_eq!(r.argmax[0], -1.0);
        let r = maximize_1d(
            |x| -(x - 0.25).powi(2),
            &Interval::new(f64::NEG_INFINITY, -0.223, false, true),
            &cfg,
        )
        .unwrap();
        assert_eq!(r.argmax[0], -0.223);
        // increasing forever: sup approached at infinity
        let r = maximize_1d(|x| -(-x).exp(), &Interval::new(0.0, f64::INFINITY, true, false), &cfg).unwrap();
        assert!(!r.attained);
        assert!(r.max_value > -1e-6);
    }

    #[test]
    fn bimodal_function_uses_multistart() {
        let cfg = OptimizerConfig::default();
        let f = |x: f64| (-(x - 0.1).powi(2) / 0.001).exp() + 2.0 * (-(x - 0.8).powi(2) / 0.001).exp();
        let r = maximize_1d(f, &Interval::closed(0.0, 1.0), &cfg).unwrap();
        assert!((r.argmax[0] - 0.8).abs() < 1e-6);
    }

    #[test]
    fn quadratic_bowl_in_a_box() {
        let cfg = OptimizerConfig::default();
        let c = [0.3, -1.2, 2.5];
        let f = |v: &[f64]| -v.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let bounds = [
            Interval::closed(-1.0, 1.0),
            Interval::closed(-5.0, 5.0),
            Interval::real_line(),
        ];
        let r = maximize_box(f, &bounds, None, &cfg).unwrap();
        for (a, b) in r.argmax.iter().zip(&c) {
            assert!((a - b).abs() < 1e-6, "{:?}", r.argmax);
        }
        assert!(r.converged);
    }

    #[test]
    fn box_respects_bounds() {
        let cfg = OptimizerConfig::default();
        let f = |v: &[f64]| v[0] + v[1];
        let r = maximize_box(f, &[Interval::closed(0.0, 1.0), Interval::closed(0.0, 2.0)], None, &cfg).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-9 && (r.argmax[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_box_delegates() {
        let cfg = OptimizerConfig::default();
        let iv = Interval::closed(0.0, 1.0);
        let a = maximize_box(|v: &[f64]| binom(v[0]), &[iv], None, &cfg).unwrap();
        let b = maximize_1d(binom, &iv, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bisection_examples() {
        let cfg = OptimizerConfig::default();
        let r = find_root_1d(|t| t - 0.2, 0.0, 1.0, &cfg).unwrap();
        assert!((r - 0.2).abs() <= cfg.abs_tol_x);
        assert!(matches!(
            find_root_1d(|t| t + 1.0, 0.0, 1.0, &cfg),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn bisection_lower_support_endpoint_matches_grid_scan() {
        let cfg = OptimizerConfig::default();
        let top = binom(9.0 / 17.0);
        let g = |t: f64| binom(t) - (top - 8f64.ln());
        let root = find_root_1d(g, 0.0, 9.0 / 17.0, &cfg).unwrap();
        // oracle: first grid point (step 1e-5) with g > 0
        let step = 1e-5;
        let first = (0..=100_000).map(|i| i as f64 * step).find(|&t| g(t) > 0.0).unwrap();
        assert!(root <= first && first - root <= step, "{root} vs {first}");
    }

    proptest! {
        #[test]
        fn concave_maximum_dominates_random_points(
            x in 0usize..40, extra in 0usize..40, lo in 0.0f64..0.5, width in 0.01f64..0.5, seed in any::<u64>()
        ) {
            let n = x + extra + 1;
            let f = |t: f64| x as f64 * t.ln() + (n - x) as f64 * (1.0 - t).ln();
            let iv = Interval::closed(lo, lo + width);
            let cfg = OptimizerConfig::default();
            let r = maximize_1d(f, &iv, &cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..1000 {
                let p = rng.random_range(iv.lo..=iv.hi);
                prop_assert!(r.max_value >= clean(f(p)) - cfg.abs_tol_f, "{} < {}", r.max_value, f(p));
            }
        }

        #[test]
        fn tighter_tolerance_never_loses_more_than_old_tolerance(
            x in 1usize..40, extra in 1usize..40, lo in 0.0f64..0.5, width in 0.01f64..0.5
        ) {
            let n = x + extra;
            let f = |t: f64| x as f64 * t.ln() + (n - x) as f64 * (1.0 - t).ln();
            let iv = Interval::closed(lo, lo + width);
            let loose = OptimizerConfig { abs_tol_x: 1e-6, abs_tol_f: 1e-8, ..Default::default() };
            let tight = OptimizerConfig { abs_tol_x: 1e-7, abs_tol_f: 1e-9, ..Default::default() };
            let a = maximize_1d(f, &iv, &loose).unwrap();
            let b = maximize_1d(f, &iv, &tight).unwrap();
            prop_assert!(b.max_value >= a.max_value - loose.abs_tol_f);
        }

        #[test]
        fn bisection_residual_is_within_one_step(c in -0.99f64..0.99, k in 0.1f64..10.0) {
            let cfg = OptimizerConfig::default();
            let g = |t: f64| k * (t - c) + (t - c).powi(3);
            let r = find_root_1d(g, -1.0, 1.0, &cfg).unwrap();
            let bound = g(r - cfg.abs_tol_x).abs().max(g(r + cfg.abs_tol_x).abs());
            prop_assert!(g(r).abs() <= bound);
        }
    }
}
