//! Evidence under the generalized law of likelihood.
//!
//! The strength of evidence for `H1: θ ∈ Θ1` over `H2: θ ∈ Θ2` is the ratio of
//! likelihood suprema `sup L(Θ1) / sup L(Θ2)`. Everything here works on the log
//! scale, and every supremum is taken over the closure of its region so that
//! open hypotheses (`θ > 0.2`) still have a well-defined value.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{maximize_1d, maximize_box, MaxResult, OptimizerConfig};
use crate::region::{Interval, ParameterSpace, Region, ScalarRegion};
use crate::serde_ext::{extended_real, format_sig};

/// Log-ratios within this distance of zero are reported as neutral.
pub const NEUTRAL_LOG_TOL: f64 = 1e-9;

/// Slack (log scale) when a grid scan compares a likelihood with a threshold.
pub const GRID_LOG_SLACK: f64 = 1e-9;

/// A log-likelihood over a named parameter space.
///
/// Models with more than one parameter may designate one *interest* parameter and
/// provide its profile `sup_ω log L(γ, ω)`; one-parameter models get this for free.
pub trait LikelihoodModel: Send + Sync {
    fn space(&self) -> &ParameterSpace;

    /// `log L(θ)`; `-inf` where the likelihood vanishes or `θ` is infeasible.
    fn log_lik(&self, point: &[f64]) -> f64;

    fn interest(&self) -> Option<usize> {
        (self.space().dim() == 1).then_some(0)
    }

    /// Maximizes over the nuisance parameters with the interest parameter fixed at `gamma`.
    fn profile(&self, gamma: f64, _cfg: &OptimizerConfig) -> Result<ProfilePoint> {
        if self.space().dim() == 1 {
            return Ok(ProfilePoint {
                log_lik: self.log_lik(&[gamma]),
                point: vec![gamma],
            });
        }
        Err(Error::InvalidArgument("model has no profile likelihood".into()))
    }

    /// Starting point for derivative-free searches over the full space.
    fn start_point(&self) -> Option<Vec<f64>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub log_lik: f64,
    /// Full parameter vector attaining the profile value.
    pub point: Vec<f64>,
}

/// Adds a constant to another model's log-likelihood.
#[derive(Debug, Clone)]
pub struct Offset<M> {
    pub inner: M,
    pub offset: f64,
}

impl<M: LikelihoodModel> LikelihoodModel for Offset<M> {
    fn space(&self) -> &ParameterSpace {
        self.inner.space()
    }
    fn log_lik(&self, point: &[f64]) -> f64 {
        self.inner.log_lik(point) + self.offset
    }
    fn interest(&self) -> Option<usize> {
        self.inner.interest()
    }
    fn profile(&self, gamma: f64, cfg: &OptimizerConfig) -> Result<ProfilePoint> {
        let mut p = self.inner.profile(gamma, cfg)?;
        p.log_lik += self.offset;
        Ok(p)
    }
    fn start_point(&self) -> Option<Vec<f64>> {
        self.inner.start_point()
    }
}

fn interest_of<M: LikelihoodModel + ?Sized>(m: &M) -> Result<usize> {
    m.interest()
        .ok_or_else(|| Error::InvalidArgument("model has no scalar interest parameter".into()))
}

/// Profile log-likelihood as a plain function; the first error is parked in `err`.
fn profile_fn<'a, M: LikelihoodModel + ?Sized>(
    m: &'a M,
    cfg: &'a OptimizerConfig,
    err: &'a RefCell<Option<Error>>,
) -> impl Fn(f64) -> f64 + 'a {
    move |g| match m.profile(g, cfg) {
        Ok(p) => p.log_lik,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    }
}

/// Supremum of the (profile) log-likelihood over a union of intervals of the interest axis.
fn sup_over_interest<M: LikelihoodModel + ?Sized>(
    m: &M,
    set: &ScalarRegion,
    cfg: &OptimizerConfig,
) -> Result<MaxResult> {
    let err = RefCell::new(None);
    let f = profile_fn(m, cfg, &err);
    let mut best: Option<MaxResult> = None;
    let mut iterations = 0;
    let mut last_err = None;
    for iv in set.closure().intervals() {
        match maximize_1d(&f, iv, cfg) {
            Ok(r) => {
                iterations += r.iterations;
                if best.as_ref().is_none_or(|b| r.max_value > b.max_value) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    let mut best = best.ok_or_else(|| last_err.unwrap_or(Error::EmptyRegion))?;
    best.iterations = iterations;
    Ok(best)
}

/// `sup log L` over `region`, maximizing over its closure.
///
/// Regions that only constrain the interest parameter are handled on the profile
/// likelihood; anything else is searched box by box in the full space.
pub fn sup_log_lik<M: LikelihoodModel + ?Sized>(m: &M, region: &Region, cfg: &OptimizerConfig) -> Result<MaxResult> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if let Some(i) = m.interest() {
        if let Some(set) = region.as_scalar(i) {
            let r = sup_over_interest(m, &set, cfg)?;
            let point = m.profile(r.argmax[0], cfg)?.point;
            let attained = r.attained && region.contains(&point);
            return Ok(MaxResult {
                argmax: point,
                attained,
                ..r
            });
        }
    }

    let start = m.start_point();
    let mut best: Option<MaxResult> = None;
    let mut iterations = 0;
    let mut last_err = None;
    for cell in region.cells() {
        for bx in cell.closed_boxes() {
            let seed = start.as_ref().map(|s| {
                s.iter()
                    .zip(&bx)
                    .map(|(&v, iv)| v.clamp(iv.lo, iv.hi))
                    .collect::<Vec<_>>()
            });
            match maximize_box(|p: &[f64]| m.log_lik(p), &bx, seed.as_deref(), cfg) {
                Ok(r) => {
                    iterations += r.iterations;
                    if best.as_ref().is_none_or(|b| r.max_value > b.max_value) {
                        best = Some(r);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    let mut best = best.ok_or_else(|| last_err.unwrap_or(Error::EmptyRegion))?;
    best.iterations = iterations;
    best.attained = best.attained && region.contains(&best.argmax);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strength {
    #[serde(rename = "neutral")]
    Neutral,
    #[serde(rename = "weak")]
    Weak,
    #[serde(rename = "fairly strong")]
    FairlyStrong,
    #[serde(rename = "strong")]
    Strong,
}

impl Strength {
    /// Benchmarks 8 (fairly strong) and 32 (strong) applied to `max(r, 1/r)`.
    pub fn from_log_ratio(log_ratio: f64) -> Self {
        let a = log_ratio.abs();
        if a <= NEUTRAL_LOG_TOL {
            Strength::Neutral
        } else if a >= 32f64.ln() {
            Strength::Strong
        } else if a >= 8f64.ln() {
            Strength::FairlyStrong
        } else {
            Strength::Weak
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Favors {
    H1,
    H2,
    Neither,
}

impl Favors {
    pub fn from_log_ratio(log_ratio: f64) -> Self {
        if log_ratio > NEUTRAL_LOG_TOL {
            Favors::H1
        } else if log_ratio < -NEUTRAL_LOG_TOL {
            Favors::H2
        } else {
            Favors::Neither
        }
    }
}

/// Result of comparing two hypotheses; `glr = sup L(Θ1) / sup L(Θ2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceReport {
    #[serde(serialize_with = "extended_real")]
    pub glr: f64,
    #[serde(serialize_with = "extended_real")]
    pub log_glr: f64,
    #[serde(serialize_with = "extended_real")]
    pub sup1: f64,
    #[serde(serialize_with = "extended_real")]
    pub sup2: f64,
    pub argmax1: Vec<f64>,
    pub argmax2: Vec<f64>,
    pub attained1: bool,
    pub attained2: bool,
    pub favors: Favors,
    pub strength: Strength,
}

impl EvidenceReport {
    fn from_suprema(s1: MaxResult, s2: MaxResult) -> Self {
        let log_glr = s1.max_value - s2.max_value;
        EvidenceReport {
            glr: log_glr.exp(),
            log_glr,
            sup1: s1.max_value,
            sup2: s2.max_value,
            argmax1: s1.argmax,
            argmax2: s2.argmax,
            attained1: s1.attained,
            attained2: s2.attained,
            favors: Favors::from_log_ratio(log_glr),
            strength: Strength::from_log_ratio(log_glr),
        }
    }

    /// The same comparison with the hypotheses swapped.
    pub fn swapped(&self) -> Self {
        EvidenceReport {
            glr: (-self.log_glr).exp(),
            log_glr: -self.log_glr,
            sup1: self.sup2,
            sup2: self.sup1,
            argmax1: self.argmax2.clone(),
            argmax2: self.argmax1.clone(),
            attained1: self.attained2,
            attained2: self.attained1,
            favors: Favors::from_log_ratio(-self.log_glr),
            strength: self.strength,
        }
    }
}

/// Generalized likelihood ratio of `h1` over `h2`.
pub fn glr<M: LikelihoodModel + ?Sized>(
    m: &M,
    h1: &Region,
    h2: &Region,
    cfg: &OptimizerConfig,
) -> Result<EvidenceReport> {
    let s1 = sup_log_lik(m, h1, cfg)?;
    let s2 = sup_log_lik(m, h2, cfg)?;
    Ok(EvidenceReport::from_suprema(s1, s2))
}

/// Evidence for `h` with its complement as the comparator.
pub fn evidence_vs_complement<M: LikelihoodModel + ?Sized>(
    m: &M,
    h: &Region,
    cfg: &OptimizerConfig,
) -> Result<EvidenceReport> {
    let c = h.complement()?;
    glr(m, h, &c, cfg)
}

/// The 1/k support set `{γ : L̃(γ) > sup L / k}` on the interest axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportSet {
    pub k: f64,
    pub interest: String,
    pub intervals: ScalarRegion,
    /// Maximizer of the (profile) likelihood.
    pub peak: f64,
    pub peak_log_lik: f64,
    /// `peak_log_lik - ln k`.
    pub threshold_log_lik: f64,
}

impl SupportSet {
    pub fn contains(&self, gamma: f64) -> bool {
        self.intervals.contains(gamma)
    }
}

/// Finite window of the interest axis outside of which the profile stays below `threshold`.
fn scan_window<F: Fn(f64) -> f64>(f: &F, domain: &Interval, peak: f64, threshold: f64) -> (f64, f64) {
    let reach = |dir: f64, bound: f64| -> f64 {
        if bound.is_finite() {
            return bound;
        }
        let mut step = 1e-3 * peak.abs().max(1.0);
        let mut x = peak + dir * step;
        for _ in 0..1100 {
            if !x.is_finite() {
                break;
            }
            if !(f(x) > threshold) {
                return x;
            }
            step *= 2.0;
            x = peak + dir * step;
        }
        x.clamp(-f64::MAX, f64::MAX)
    };
    (reach(-1.0, domain.lo), reach(1.0, domain.hi))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Computes the 1/k support set on the interest axis of `m`.
///
/// A grid scan locates every stretch above the threshold; each crossing is then
/// refined by bisection, so endpoints are exact to `abs_tol_x` while components
/// narrower than the grid step around a secondary peak could be missed.
pub fn support_set<M: LikelihoodModel + ?Sized>(m: &M, k: f64, cfg: &OptimizerConfig) -> Result<SupportSet> {
    if !(k > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "support level k must exceed 1, got {k}"
        )));
    }
    let i = interest_of(m)?;
    let domain = *m.space().domain(i);
    let peak = sup_over_interest(m, &ScalarRegion::from_interval(domain), cfg)?;
    let gamma_hat = peak.argmax[0];
    let threshold = peak.max_value - k.ln();

    let err = RefCell::new(None);
    let f = profile_fn(m, cfg, &err);
    let (lo, hi) = scan_window(&f, &domain.closure(), gamma_hat, threshold);

    let mut grid = linspace(lo, hi, cfg.grid_points);
    grid.push(gamma_hat);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&g| m.profile(g, cfg).map(|p| p.log_lik))
        .collect::<Result<_>>()?;
    let above: Vec<bool> = values.iter().map(|&v| v > threshold).collect();

    let g = |x: f64| f(x) - threshold;
    let mut intervals = Vec::new();
    let mut idx = 0;
    while idx < grid.len() {
        if !above[idx] {
            idx += 1;
            continue;
        }
        let start = idx;
        while idx + 1 < grid.len() && above[idx + 1] {
            idx += 1;
        }
        let end = idx;
        let (left, left_closed) = if start == 0 {
            (grid[0], domain.contains(grid[0]))
        } else {
            (
                crate::optimize::find_root_1d(g, grid[start - 1], grid[start], cfg)?,
                false,
            )
        };
        let (right, right_closed) = if end + 1 == grid.len() {
            (grid[end], domain.contains(grid[end]))
        } else {
            (crate::optimize::find_root_1d(g, grid[end], grid[end + 1], cfg)?, false)
        };
        intervals.push(Interval::new(left, right, left_closed, right_closed));
        idx += 1;
    }
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(SupportSet {
        k,
        interest: m.space().params()[i].name.clone(),
        intervals: ScalarRegion::from_intervals(intervals),
        peak: gamma_hat,
        peak_log_lik: peak.max_value,
        threshold_log_lik: threshold,
    })
}

/// Outcome of checking that a set supported over its complement by `k` contains `S_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupersetCheck {
    pub k: f64,
    /// `sup L(S) / sup L(S^c)`.
    #[serde(serialize_with = "extended_real")]
    pub ratio: f64,
    /// Whether the ratio reaches `k`.
    pub premise: bool,
    /// Grid points found in `S_k` but outside `S`; `None` when the premise fails.
    pub violations: Option<usize>,
    pub grid_points: usize,
}

impl SupersetCheck {
    /// True iff the premise holds and no grid point of `S_k` falls outside `S`.
    pub fn holds(&self) -> bool {
        self.premise && self.violations == Some(0)
    }
}

/// If `sup L(s) / sup L(s^c) >= k`, verifies on a grid that `S_k ⊆ s`.
pub fn min_supported_superset_check<M: LikelihoodModel + ?Sized>(
    m: &M,
    s: &Region,
    k: f64,
    cfg: &OptimizerConfig,
) -> Result<SupersetCheck> {
    if !(k > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "support level k must exceed 1, got {k}"
        )));
    }
    let report = evidence_vs_complement(m, s, cfg)?;
    let log_k = k.ln();
    let premise = report.log_glr >= log_k - 1e-12 * log_k.abs().max(1.0);
    let mut check = SupersetCheck {
        k,
        ratio: report.glr,
        premise,
        violations: None,
        grid_points: 0,
    };
    if !premise {
        return Ok(check);
    }
    let top = report.sup1.max(report.sup2);
    let threshold = top - log_k + GRID_LOG_SLACK * top.abs().max(1.0);

    let points: Vec<(Vec<f64>, f64)> = match m.interest().filter(|&i| s.as_scalar(i).is_some()) {
        Some(i) => {
            let domain = m.space().domain(i).closure();
            let err = RefCell::new(None);
            let f = profile_fn(m, cfg, &err);
            let (lo, hi) = scan_window(&f, &domain, report.argmax1[i], threshold);
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
            linspace(lo, hi, cfg.grid_points)
                .into_par_iter()
                .map(|g| m.profile(g, cfg).map(|p| (p.point, p.log_lik)))
                .collect::<Result<_>>()?
        }
        None => tensor_grid(m.space(), cfg.grid_points)?
            .into_par_iter()
            .map(|p| {
                let v = m.log_lik(&p);
                (p, v)
            })
            .collect(),
    };
    check.grid_points = points.len();
    check.violations = Some(points.iter().filter(|(p, v)| *v > threshold && !s.contains(p)).count());
    Ok(check)
}

fn tensor_grid(space: &ParameterSpace, total: usize) -> Result<Vec<Vec<f64>>> {
    let dim = space.dim();
    let per_axis = ((total as f64).powf(1.0 / dim as f64).floor() as usize).max(2);
    let axes: Vec<Vec<f64>> = space
        .params()
        .iter()
        .map(|p| {
            if p.domain.lo.is_finite() && p.domain.hi.is_finite() {
                Ok(linspace(p.domain.lo, p.domain.hi, per_axis))
            } else {
                Err(Error::InvalidArgument(format!(
                    "grid check over unbounded parameter `{}` needs a profile model",
                    p.name
                )))
            }
        })
        .collect::<Result<_>>()?;
    let mut pts = vec![Vec::with_capacity(dim)];
    for axis in &axes {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    Ok(pts)
}

/// `k* = sup{k > 1 : S_k ⊆ A}`, or 1 when no such k exists.
///
/// Computed as the GLR of `A` over its complement whenever that exceeds 1.
pub fn k_star<M: LikelihoodModel + ?Sized>(m: &M, a: &Region, cfg: &OptimizerConfig) -> Result<f64> {
    let r = evidence_vs_complement(m, a, cfg)?;
    Ok(if r.log_glr > 0.0 { r.glr } else { 1.0 })
}

/// Equally spaced evaluation points `lo, ..., hi` (`steps` of them).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidArgument(format!("invalid grid {lo}:{hi}:{steps}")));
        }
        Ok(GridSpec { lo, hi, steps })
    }

    /// Parses `lo:hi:steps`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || Error::InvalidArgument(format!("grid must look like lo:hi:steps, got `{text}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(lo, hi, steps)
    }

    pub fn points(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.steps)
    }
}

/// Profile likelihood on a grid, divided by its maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub interest: String,
    pub grid: Vec<f64>,
    pub normalized_lik: Vec<f64>,
    pub peak_index: usize,
    /// Off-grid maximizer used for normalization.
    pub peak: f64,
    pub peak_log_lik: f64,
}

impl ProfileCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,normalized_likelihood\n");
        for (g, v) in self.grid.iter().zip(&self.normalized_lik) {
            out.push_str(&format_sig(*g, 12));
            out.push(',');
            out.push_str(&format_sig(*v, 12));
            out.push('\n');
        }
        out
    }
}

/// Evaluates the normalized profile likelihood of the interest parameter on `grid`.
pub fn profile_curve<M: LikelihoodModel + ?Sized>(
    m: &M,
    grid: &GridSpec,
    cfg: &OptimizerConfig,
) -> Result<ProfileCurve> {
    let i = interest_of(m)?;
    let domain = *m.space().domain(i);
    let closed = domain.closure();
    let points = grid.points();
    if let Some(bad) = points.iter().find(|&&g| !closed.contains(g)) {
        return Err(Error::InvalidArgument(format!(
            "grid point {bad} lies outside the range {domain} of `{}`",
            m.space().params()[i].name
        )));
    }
    let values: Vec<f64> = points
        .par_iter()
        .map(|&g| m.profile(g, cfg).map(|p| p.log_lik))
        .collect::<Result<_>>()?;
    let peak = sup_over_interest(m, &ScalarRegion::from_interval(domain), cfg)?;
    let (peak_index, grid_max) =
        values.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
        );
    let top = peak.max_value.max(grid_max);
    Ok(ProfileCurve {
        interest: m.space().params()[i].name.clone(),
        normalized_lik: values.iter().map(|v| (v - top).exp()).collect(),
        grid: points,
        peak_index,
        peak: peak.argmax[0],
        peak_log_lik: top,
    })
}
