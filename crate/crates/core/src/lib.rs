//! Evidential statistics under the generalized law of likelihood.

pub mod asymptotics;
pub mod error;
pub mod likelihood;
pub mod models;
pub mod optimize;
pub mod predicate;
pub mod reduced;
pub mod region;
pub mod serde_ext;

pub use error::{Error, Result};

/// Library version, echoed in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
