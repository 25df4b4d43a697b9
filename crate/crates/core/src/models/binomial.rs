use crate::error::{Error, Result};
use crate::likelihood::LikelihoodModel;
use crate::region::{Interval, ParameterSpace};

/// `x ln p` with `0 ln 0 = 0`.
pub(crate) fn xlogy(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * p.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialData {
    pub successes: u64,
    pub trials: u64,
}

impl BinomialData {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::InvalidArgument(format!(
                "binomial data needs 0 <= x <= n and n >= 1, got x = {successes}, n = {trials}"
            )));
        }
        Ok(BinomialData { successes, trials })
    }

    pub fn mle(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// `x ln θ + (n - x) ln(1 - θ)`; the binomial coefficient is dropped.
pub fn binomial_loglik(d: &BinomialData, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "success probability {theta} outside [0, 1]"
        )));
    }
    Ok(binomial_loglik_unchecked(d, theta))
}

pub(crate) fn binomial_loglik_unchecked(d: &BinomialData, theta: f64) -> f64 {
    let x = d.successes as f64;
    let n = d.trials as f64;
    xlogy(x, theta) + xlogy(n - x, 1.0 - theta)
}

/// Binomial likelihood for a success probability `theta ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct BinomialModel {
    data: BinomialData,
    space: ParameterSpace,
}

impl BinomialModel {
    pub fn new(data: BinomialData) -> Self {
        BinomialModel {
            data,
            space: ParameterSpace::scalar("theta", Interval::closed(0.0, 1.0)).expect("valid space"),
        }
    }

    pub fn data(&self) -> &BinomialData {
        &self.data
    }
}

impl LikelihoodModel for BinomialModel {
    fn space(&self) -> &ParameterSpace {
        &self.space
    }

    fn log_lik(&self, point: &[f64]) -> f64 {
        binomial_loglik(&self.data, point[0]).unwrap_or(f64::NEG_INFINITY)
    }
}
