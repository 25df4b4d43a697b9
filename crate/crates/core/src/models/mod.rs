//! Concrete likelihood models.

pub mod binomial;
pub mod bivnorm;
pub mod two_binomial;

pub use binomial::{binomial_loglik, BinomialData, BinomialModel};
pub use bivnorm::{
    bivnorm_loglik, bivnorm_profile_mean_diff, bivnorm_profile_sd_ratio, BivariateInterest, BivariateNormalModel,
    BivariateNormalParams, PairedSample,
};
pub use two_binomial::{two_binomial_profile_loglik, TwoBinomialData, TwoBinomialModel};
