use crate::error::{Error, Result};
use crate::likelihood::{LikelihoodModel, ProfilePoint};
use crate::models::binomial::{binomial_loglik_unchecked, BinomialData};
use crate::optimize::{maximize_1d, OptimizerConfig};
use crate::region::{Interval, Parameter, ParameterSpace};

/// Two independent binomial groups. The interest parameter is `delta = p1 - p2`,
/// the nuisance parameter is `p2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoBinomialData {
    pub group1: BinomialData,
    pub group2: BinomialData,
}

impl TwoBinomialData {
    pub fn new(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<Self> {
        Ok(TwoBinomialData {
            group1: BinomialData::new(x1, n1)?,
            group2: BinomialData::new(x2, n2)?,
        })
    }

    /// Unconstrained MLE of the difference, `x1/n1 - x2/n2`.
    pub fn delta_hat(&self) -> f64 {
        self.group1.mle() - self.group2.mle()
    }

    /// Joint log-likelihood at `(delta, p2)`; `-inf` off the feasible set.
    pub fn log_lik(&self, delta: f64, p2: f64) -> f64 {
        let p1 = p2 + delta;
        if !(0.0..=1.0).contains(&p2) || !(0.0..=1.0).contains(&p1) {
            return f64::NEG_INFINITY;
        }
        binomial_loglik_unchecked(&self.group1, p1) + binomial_loglik_unchecked(&self.group2, p2)
    }

    /// Range of `p2` keeping both probabilities in `[0, 1]`.
    pub fn nuisance_range(delta: f64) -> Option<Interval> {
        if !(-1.0..=1.0).contains(&delta) {
            return None;
        }
        let lo = 0f64.max(-delta);
        let hi = 1f64.min(1.0 - delta);
        (lo <= hi).then(|| Interval::closed(lo, hi))
    }
}

/// Profile log-likelihood of `delta`, maximizing over `p2`.
pub fn two_binomial_profile_loglik(d: &TwoBinomialData, delta: f64, cfg: &OptimizerConfig) -> Result<ProfilePoint> {
    let range = TwoBinomialData::nuisance_range(delta)
        .ok_or_else(|| Error::InvalidArgument(format!("difference {delta} is infeasible")))?;
    match maximize_1d(|p2| d.log_lik(delta, p2), &range, cfg) {
        Ok(r) => Ok(ProfilePoint {
            log_lik: r.max_value,
            point: vec![delta, r.argmax[0]],
        }),
        // the likelihood vanishes on the whole slice
        Err(Error::NoFiniteValue) => Ok(ProfilePoint {
            log_lik: f64::NEG_INFINITY,
            point: vec![delta, 0.5 * (range.lo + range.hi)],
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone)]
pub struct TwoBinomialModel {
    data: TwoBinomialData,
    space: ParameterSpace,
}

impl TwoBinomialModel {
    pub fn new(data: TwoBinomialData) -> Self {
        let space = ParameterSpace::new(vec![
            Parameter::new("delta", Interval::closed(-1.0, 1.0)),
            Parameter::new("p2", Interval::closed(0.0, 1.0)),
        ])
        .expect("valid space");
        TwoBinomialModel { data, space }
    }

    pub fn data(&self) -> &TwoBinomialData {
        &self.data
    }
}

impl LikelihoodModel for TwoBinomialModel {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }

    fn log_lik(&self, point: &[f64]) -> f64 {
        self.data.log_lik(point[0], point[1])
    }

    fn interest(&self) -> Option<usize> {
        Some(0)
    }

    fn profile(&self, gamma: f64, cfg: &OptimizerConfig) -> Result<ProfilePoint> {
        two_binomial_profile_loglik(&self.data, gamma, cfg)
    }

    fn start_point(&self) -> Option<Vec<f64>> {
        Some(vec![self.data.delta_hat(), self.data.group2.mle()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial() -> TwoBinomialData {
        TwoBinomialData::new(83, 88, 69, 76).unwrap()
    }

    /// Constrained MLE of p2 by bisection on the score equation (the profile is concave in p2).
    fn oracle_profile(d: &TwoBinomialData, delta: f64) -> f64 {
        let (x1, n1) = (d.group1.successes as f64, d.group1.trials as f64);
        let (x2, n2) = (d.group2.successes as f64, d.group2.trials as f64);
        let score = |p: f64| {
            let p1 = p + delta;
            x1 / p1 - (n1 - x1) / (1.0 - p1) + x2 / p - (n2 - x2) / (1.0 - p)
        };
        let r = TwoBinomialData::nuisance_range(delta).unwrap();
        let (mut lo, mut hi) = (r.lo + 1e-15, r.hi - 1e-15);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if score(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        d.log_lik(delta, 0.5 * (lo + hi))
    }

    #[test]
    fn profile_matches_score_bisection() {
        let d = trial();
        let cfg = OptimizerConfig::default();
        for delta in [-0.3, -0.1, 0.0, 0.02, 0.0353, 0.06] {
            let p = two_binomial_profile_loglik(&d, delta, &cfg).unwrap();
            assert!((p.log_lik - oracle_profile(&d, delta)).abs() < 1e-10, "{delta}");
        }
    }

    #[test]
    fn peak_is_sum_of_unconstrained_maxima() {
        let d = trial();
        let cfg = OptimizerConfig::default();
        let at_hat = two_binomial_profile_loglik(&d, d.delta_hat(), &cfg).unwrap();
        let unconstrained =
            binomial_loglik_unchecked(&d.group1, d.group1.mle()) + binomial_loglik_unchecked(&d.group2, d.group2.mle());
        assert!((at_hat.log_lik - unconstrained).abs() < 1e-9);
    }

    #[test]
    fn reported_ratios() {
        let d = trial();
        let cfg = OptimizerConfig::default();
        let top = two_binomial_profile_loglik(&d, d.delta_hat(), &cfg).unwrap().log_lik;
        let margin = two_binomial_profile_loglik(&d, -0.1, &cfg).unwrap().log_lik;
        let zero = two_binomial_profile_loglik(&d, 0.0, &cfg).unwrap().log_lik;
        let r_margin = (top - margin).exp();
        let r_zero = (top - zero).exp();
        assert!((r_margin / 138.0 - 1.0).abs() < 0.05, "{r_margin}");
        assert!((r_zero - 1.4).abs() < 0.1, "{r_zero}");
    }

    #[test]
    fn infeasible_difference() {
        let cfg = OptimizerConfig::default();
        assert!(two_binomial_profile_loglik(&trial(), 1.5, &cfg).is_err());
        // delta = 1 forces p2 = 0, p1 = 1; the likelihood vanishes for this data
        let edge = two_binomial_profile_loglik(&trial(), 1.0, &cfg).unwrap();
        assert_eq!(edge.log_lik, f64::NEG_INFINITY);
    }

    #[test]
    fn profile_is_continuous() {
        let d = trial();
        let cfg = OptimizerConfig::default();
        let mut prev = two_binomial_profile_loglik(&d, -0.5, &cfg).unwrap().log_lik;
        let h = 1e-3;
        for i in 1..=700 {
            let delta = -0.5 + i as f64 * h;
            let v = two_binomial_profile_loglik(&d, delta, &cfg).unwrap().log_lik;
            // |d profile / d delta| is bounded by the score magnitude on this range
            assert!((v - prev).abs() < 1.0, "jump at {delta}");
            prev = v;
        }
    }
}
