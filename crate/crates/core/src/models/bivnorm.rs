//! Bivariate normal model for paired log-AUC values `(y_T, y_R)` from a crossover trial.
//!
//! Profiles are computed numerically; the sd-ratio search runs in `(ln σ, atanh ρ)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::likelihood::{LikelihoodModel, ProfilePoint};
use crate::optimize::{maximize_1d, maximize_box, OptimizerConfig};
use crate::region::{Interval, Parameter, ParameterSpace};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
/// Bound on `atanh ρ`; `tanh(10)` is within 1e-8 of 1.
const Z_BOUND: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BivariateNormalParams {
    pub mu_t: f64,
    pub mu_r: f64,
    pub sigma_t: f64,
    pub sigma_r: f64,
    pub rho: f64,
}

impl BivariateNormalParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_t.is_finite()
            && self.mu_r.is_finite()
            && self.sigma_t > 0.0
            && self.sigma_r > 0.0
            && self.sigma_t.is_finite()
            && self.sigma_r.is_finite()
            && self.rho > -1.0
            && self.rho < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "singular or invalid bivariate normal parameters {self:?}"
            )))
        }
    }
}

/// Means and divisor-n second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Moments {
    n: f64,
    mean_t: f64,
    mean_r: f64,
    s_tt: f64,
    s_rr: f64,
    s_tr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    y_t: Vec<f64>,
    y_r: Vec<f64>,
    moments: Moments,
}

impl PairedSample {
    pub fn new(y_t: Vec<f64>, y_r: Vec<f64>) -> Result<Self> {
        if y_t.len() != y_r.len() {
            return Err(Error::InvalidArgument("paired sample columns differ in length".into()));
        }
        if y_t.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 3 pairs, got {}",
                y_t.len()
            )));
        }
        if y_t.iter().chain(&y_r).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "paired sample contains a non-finite value".into(),
            ));
        }
        let n = y_t.len() as f64;
        let mean_t = y_t.iter().sum::<f64>() / n;
        let mean_r = y_r.iter().sum::<f64>() / n;
        let (mut s_tt, mut s_rr, mut s_tr) = (0.0, 0.0, 0.0);
        for (t, r) in y_t.iter().zip(&y_r) {
            let (a, b) = (t - mean_t, r - mean_r);
            s_tt += a * a;
            s_rr += b * b;
            s_tr += a * b;
        }
        let moments = Moments {
            n,
            mean_t,
            mean_r,
            s_tt: s_tt / n,
            s_rr: s_rr / n,
            s_tr: s_tr / n,
        };
        let det = moments.s_tt * moments.s_rr - moments.s_tr * moments.s_tr;
        if !(det > 1e-300) || !(det > 1e-14 * moments.s_tt * moments.s_rr) {
            return Err(Error::InvalidArgument("sample covariance is singular".into()));
        }
        Ok(PairedSample { y_t, y_r, moments })
    }

    /// Draws `n` pairs from the model; deterministic in `seed`.
    pub fn synthetic(n: usize, p: &BivariateNormalParams, seed: u64) -> Result<Self> {
        p.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let root = (1.0 - p.rho * p.rho).sqrt();
        let mut y_t = Vec::with_capacity(n);
        let mut y_r = Vec::with_capacity(n);
        for _ in 0..n {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            y_r.push(p.mu_r + p.sigma_r * z1);
            y_t.push(p.mu_t + p.sigma_t * (p.rho * z1 + root * z2));
        }
        Self::new(y_t, y_r)
    }

    pub fn len(&self) -> usize {
        self.y_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_t.is_empty()
    }

    pub fn y_t(&self) -> &[f64] {
        &self.y_t
    }

    pub fn y_r(&self) -> &[f64] {
        &self.y_r
    }

    /// Maximum likelihood estimate (covariance with divisor n).
    pub fn mle(&self) -> BivariateNormalParams {
        let m = &self.moments;
        let (st, sr) = (m.s_tt.sqrt(), m.s_rr.sqrt());
        BivariateNormalParams {
            mu_t: m.mean_t,
            mu_r: m.mean_r,
            sigma_t: st,
            sigma_r: sr,
            rho: m.s_tr / (st * sr),
        }
    }

    /// `-n (ln 2π + 1 + ½ ln det Σ̂)`.
    pub fn max_log_lik(&self) -> f64 {
        let m = &self.moments;
        let det = m.s_tt * m.s_rr - m.s_tr * m.s_tr;
        -m.n * (LN_2PI + 1.0 + 0.5 * det.ln())
    }

    /// Log-likelihood maximized over the covariance with the means held at
    /// `(mu_t, mu_r)`, and the maximizing parameters.
    fn covariance_profile(&self, mu_t: f64, mu_r: f64) -> (f64, BivariateNormalParams) {
        let m = &self.moments;
        let (dt, dr) = (m.mean_t - mu_t, m.mean_r - mu_r);
        let (a, b, c) = (m.s_tt + dt * dt, m.s_rr + dr * dr, m.s_tr + dt * dr);
        // det(S + v vᵀ) as a sum of squares, avoiding cancellation for large residuals
        let det_s = m.s_tt * m.s_rr - m.s_tr * m.s_tr;
        let det = det_s + m.s_rr * (dt - m.s_tr / m.s_rr * dr).powi(2) + det_s / m.s_rr * dr * dr;
        let (st, sr) = (a.sqrt(), b.sqrt());
        let p = BivariateNormalParams {
            mu_t,
            mu_r,
            sigma_t: st,
            sigma_r: sr,
            rho: (c / (st * sr)).clamp(-1.0, 1.0),
        };
        (-m.n * (LN_2PI + 1.0 + 0.5 * det.ln()), p)
    }

    /// Log-likelihood from sufficient statistics; `-inf` for invalid parameters.
    fn log_lik_fast(&self, p: &BivariateNormalParams) -> f64 {
        if p.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        let m = &self.moments;
        let (dt, dr) = (m.mean_t - p.mu_t, m.mean_r - p.mu_r);
        let a = (m.s_tt + dt * dt) / (p.sigma_t * p.sigma_t);
        let b = (m.s_rr + dr * dr) / (p.sigma_r * p.sigma_r);
        let c = (m.s_tr + dt * dr) / (p.sigma_t * p.sigma_r);
        let one_m = 1.0 - p.rho * p.rho;
        -m.n * (LN_2PI + p.sigma_t.ln() + p.sigma_r.ln() + 0.5 * one_m.ln())
            - m.n * (a - 2.0 * p.rho * c + b) / (2.0 * one_m)
    }
}

/// Bivariate normal log-density summed over the pairs.
pub fn bivnorm_loglik(s: &PairedSample, p: &BivariateNormalParams) -> Result<f64> {
    p.validate()?;
    let one_m = 1.0 - p.rho * p.rho;
    let norm = LN_2PI + p.sigma_t.ln() + p.sigma_r.ln() + 0.5 * one_m.ln();
    Ok(s.y_t
        .iter()
        .zip(&s.y_r)
        .map(|(t, r)| {
            let zt = (t - p.mu_t) / p.sigma_t;
            let zr = (r - p.mu_r) / p.sigma_r;
            -norm - (zt * zt - 2.0 * p.rho * zt * zr + zr * zr) / (2.0 * one_m)
        })
        .sum())
}

/// Profile over `(μ_R, σ_T, σ_R, ρ)` with `μ_T = μ_R + γ`.
///
/// For fixed means the covariance is maximized at `S + v vᵀ` (`v` the mean
/// residuals), leaving a one-dimensional search over `μ_R`. Far from the data the
/// maximizer runs along a ridge with `ρ → ±1`, which a joint simplex search in
/// `(μ, ln σ, atanh ρ)` does not resolve reliably.
pub fn bivnorm_profile_mean_diff(s: &PairedSample, gamma: f64, cfg: &OptimizerConfig) -> Result<ProfilePoint> {
    if gamma.is_nan() {
        return Err(Error::InvalidArgument("mean difference is NaN".into()));
    }
    if gamma.is_infinite() {
        return Ok(ProfilePoint {
            log_lik: f64::NEG_INFINITY,
            point: vec![gamma, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
        });
    }
    let r = maximize_1d(
        |mu_r| s.covariance_profile(mu_r + gamma, mu_r).0,
        &Interval::real_line(),
        cfg,
    )?;
    let mu_r = r.argmax[0];
    let (log_lik, p) = s.covariance_profile(mu_r + gamma, mu_r);
    Ok(ProfilePoint {
        log_lik,
        point: vec![gamma, p.mu_r, p.sigma_t, p.sigma_r, p.rho],
    })
}

/// Profile over `(μ_T, μ_R, σ_R, ρ)` with `σ_T = γ σ_R`.
///
/// For any covariance the means are maximized at the sample means, so only
/// `(σ_R, ρ)` is searched numerically.
pub fn bivnorm_profile_sd_ratio(s: &PairedSample, gamma: f64, cfg: &OptimizerConfig) -> Result<ProfilePoint> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "standard deviation ratio must be positive, got {gamma}"
        )));
    }
    // the likelihood vanishes as the ratio degenerates
    if gamma == 0.0 || gamma.is_infinite() {
        return Ok(ProfilePoint {
            log_lik: f64::NEG_INFINITY,
            point: vec![gamma, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
        });
    }
    let m = &s.moments;
    let params = |x: &[f64]| BivariateNormalParams {
        mu_t: m.mean_t,
        mu_r: m.mean_r,
        sigma_t: gamma * x[0].exp(),
        sigma_r: x[0].exp(),
        rho: x[1].tanh(),
    };
    let mle = s.mle();
    let start = [
        0.5 * (mle.sigma_r.ln() + (mle.sigma_t / gamma).ln()),
        mle.rho.clamp(-0.999, 0.999).atanh(),
    ];
    let bounds = [Interval::real_line(), Interval::closed(-Z_BOUND, Z_BOUND)];
    let r = maximize_box(|x: &[f64]| s.log_lik_fast(&params(x)), &bounds, Some(&start), cfg)?;
    let p = params(&r.argmax);
    Ok(ProfilePoint {
        log_lik: r.max_value,
        point: vec![gamma, p.mu_t, p.mu_r, p.sigma_r, p.rho],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BivariateInterest {
    /// `γ₁ = μ_T − μ_R`
    MeanDiff,
    /// `γ₂ = σ_T / σ_R`
    SdRatio,
}

/// Bivariate normal model reparameterized around one interest parameter.
///
/// Coordinates are `(gamma, mu_r, sigma_t, sigma_r, rho)` for the mean difference
/// and `(gamma, mu_t, mu_r, sigma_r, rho)` for the standard deviation ratio.
#[derive(Debug, Clone)]
pub struct BivariateNormalModel {
    sample: PairedSample,
    interest: BivariateInterest,
    space: ParameterSpace,
}

impl BivariateNormalModel {
    pub fn new(sample: PairedSample, interest: BivariateInterest) -> Self {
        let pos = Interval::new(0.0, f64::INFINITY, false, false);
        let corr = Interval::open(-1.0, 1.0);
        let real = Interval::real_line();
        let params = match interest {
            BivariateInterest::MeanDiff => vec![
                Parameter::new("gamma", real),
                Parameter::new("mu_r", real),
                Parameter::new("sigma_t", pos),
                Parameter::new("sigma_r", pos),
                Parameter::new("rho", corr),
            ],
            BivariateInterest::SdRatio => vec![
                Parameter::new("gamma", pos),
                Parameter::new("mu_t", real),
                Parameter::new("mu_r", real),
                Parameter::new("sigma_r", pos),
                Parameter::new("rho", corr),
            ],
        };
        let space = ParameterSpace::new(params).expect("valid space");
        BivariateNormalModel {
            sample,
            interest,
            space,
        }
    }

    pub fn sample(&self) -> &PairedSample {
        &self.sample
    }

    pub fn interest_kind(&self) -> BivariateInterest {
        self.interest
    }

    /// Maps model coordinates to the natural parameters.
    pub fn to_params(&self, x: &[f64]) -> BivariateNormalParams {
        match self.interest {
            BivariateInterest::MeanDiff => BivariateNormalParams {
                mu_t: x[1] + x[0],
                mu_r: x[1],
                sigma_t: x[2],
                sigma_r: x[3],
                rho: x[4],
            },
            BivariateInterest::SdRatio => BivariateNormalParams {
                mu_t: x[1],
                mu_r: x[2],
                sigma_t: x[0] * x[3],
                sigma_r: x[3],
                rho: x[4],
            },
        }
    }

    /// Interest value at the unrestricted MLE.
    pub fn gamma_hat(&self) -> f64 {
        let p = self.sample.mle();
        match self.interest {
            BivariateInterest::MeanDiff => p.mu_t - p.mu_r,
            BivariateInterest::SdRatio => p.sigma_t / p.sigma_r,
        }
    }
}

impl LikelihoodModel for BivariateNormalModel {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }

    fn log_lik(&self, point: &[f64]) -> f64 {
        self.sample.log_lik_fast(&self.to_params(point))
    }

    fn interest(&self) -> Option<usize> {
        Some(0)
    }

    fn profile(&self, gamma: f64, cfg: &OptimizerConfig) -> Result<ProfilePoint> {
        match self.interest {
            BivariateInterest::MeanDiff => bivnorm_profile_mean_diff(&self.sample, gamma, cfg),
            BivariateInterest::SdRatio => bivnorm_profile_sd_ratio(&self.sample, gamma, cfg),
        }
    }

    fn start_point(&self) -> Option<Vec<f64>> {
        let p = self.sample.mle();
        Some(match self.interest {
            BivariateInterest::MeanDiff => vec![p.mu_t - p.mu_r, p.mu_r, p.sigma_t, p.sigma_r, p.rho],
            BivariateInterest::SdRatio => vec![p.sigma_t / p.sigma_r, p.mu_t, p.mu_r, p.sigma_r, p.rho],
        })
    }
}
