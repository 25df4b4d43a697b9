use std::time::Duration;

use gll_core::serde_ext::round_sig;
use serde::Serialize;
use serde_json::Value;

/// Significant digits of every number printed.
pub const DIGITS: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<gll_core::Error> for CliError {
    fn from(e: gll_core::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Reproducibility record attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: String,
    pub seed: Option<u64>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, seed: Option<u64>, elapsed: Duration) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            version: gll_core::VERSION.to_string(),
            seed,
            duration_seconds: elapsed.as_secs_f64(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    result: &'a Value,
    manifest: &'a RunManifest,
}

/// Rounds every floating-point number in `v` to [`DIGITS`] significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if let Some(r) = serde_json::Number::from_f64(round_sig(x, DIGITS)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Serializes `result` with rounded numbers, wrapped together with the manifest.
pub fn render<T: Serialize>(result: &T, manifest: &RunManifest) -> CliResult<String> {
    let mut value = serde_json::to_value(result).map_err(|e| CliError::Numeric(e.to_string()))?;
    round_numbers(&mut value);
    let env = Envelope {
        result: &value,
        manifest,
    };
    serde_json::to_string_pretty(&env).map_err(|e| CliError::Numeric(e.to_string()))
}
