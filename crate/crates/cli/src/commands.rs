use std::fs;
use std::path::{Path, PathBuf};

use gll_core::asymptotics::{
    consistency_trend, ks_distance, simulate_glr, ConsistencyReport, EmpiricalDistribution, LimitSpec, SimulationConfig,
};
use gll_core::likelihood::{evidence_vs_complement, glr, profile_curve, support_set, GridSpec, LikelihoodModel};
use gll_core::models::{
    BinomialData, BinomialModel, BivariateInterest, BivariateNormalModel, PairedSample, TwoBinomialData,
    TwoBinomialModel,
};
use gll_core::optimize::OptimizerConfig;
use gll_core::predicate::parse_region;
use gll_core::reduced::{
    glr_from_pvalue_general, glr_from_pvalue_normal, glr_from_test, PowerFunction, ReducedEvidence, TestOutcome,
};
use gll_core::region::{Interval, ParameterSpace, ScalarRegion};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::output::{CliError, CliResult};

/// Environment variable naming the default optimizer config file.
pub const CONFIG_ENV: &str = "GLL_CONFIG";

/// What a command produced: JSON to print, or raw text (CSV) for stdout.
pub enum Output {
    Json {
        value: serde_json::Value,
        seed: Option<u64>,
    },
    Text(String),
}

fn json<T: Serialize>(v: &T, seed: Option<u64>) -> CliResult<Output> {
    let value = serde_json::to_value(v).map_err(|e| CliError::Numeric(e.to_string()))?;
    Ok(Output::Json { value, seed })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Optimizer settings from `--config`, else `$GLL_CONFIG`, else defaults.
pub fn load_config(flag: Option<&Path>) -> CliResult<OptimizerConfig> {
    let path = match flag {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from),
    };
    let Some(path) = path else {
        return Ok(OptimizerConfig::default());
    };
    let cfg: OptimizerConfig =
        toml::from_str(&read_file(&path)?).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn need(v: Option<u64>, flag: &str, model: &str) -> CliResult<u64> {
    v.ok_or_else(|| usage(format!("--{flag} is required for the {model} model")))
}

#[derive(Deserialize)]
struct Pair {
    y_t: f64,
    y_r: f64,
}

fn read_pairs(path: &Path) -> CliResult<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| usage(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["y_t", "y_r"] {
        return Err(usage(format!("{}: header must be exactly `y_t,y_r`", path.display())));
    }
    let (mut y_t, mut y_r) = (Vec::new(), Vec::new());
    for row in rdr.deserialize::<Pair>() {
        let p = row.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        y_t.push(p.y_t);
        y_r.push(p.y_r);
    }
    Ok(PairedSample::new(y_t, y_r)?)
}

pub fn build_model(a: &ModelArgs) -> CliResult<Box<dyn LikelihoodModel>> {
    Ok(match a.model {
        ModelKind::Binomial => {
            let d = BinomialData::new(need(a.x, "x", "binomial")?, need(a.n, "n", "binomial")?)?;
            Box::new(BinomialModel::new(d))
        }
        ModelKind::TwoBinomial => {
            let m = "two-binomial";
            let d = TwoBinomialData::new(
                need(a.x1, "x1", m)?,
                need(a.n1, "n1", m)?,
                need(a.x2, "x2", m)?,
                need(a.n2, "n2", m)?,
            )?;
            Box::new(TwoBinomialModel::new(d))
        }
        ModelKind::BivnormMeanDiff | ModelKind::BivnormSdRatio => {
            let path = a
                .data
                .as_deref()
                .ok_or_else(|| usage("--data is required for bivariate normal models"))?;
            let interest = if a.model == ModelKind::BivnormMeanDiff {
                BivariateInterest::MeanDiff
            } else {
                BivariateInterest::SdRatio
            };
            Box::new(BivariateNormalModel::new(read_pairs(path)?, interest))
        }
    })
}

pub fn glr_cmd(a: &GlrArgs, cfg: &OptimizerConfig) -> CliResult<Output> {
    let m = build_model(&a.model)?;
    let h1 = parse_region(&a.h1, m.space())?;
    let report = match &a.h2 {
        Some(h2) => glr(m.as_ref(), &h1, &parse_region(h2, m.space())?, cfg)?,
        None => evidence_vs_complement(m.as_ref(), &h1, cfg)?,
    };
    json(&report, None)
}

fn interest_name(m: &dyn LikelihoodModel) -> CliResult<String> {
    let i = m
        .interest()
        .ok_or_else(|| usage("model has no scalar interest parameter"))?;
    Ok(m.space().params()[i].name.clone())
}

#[derive(Serialize)]
struct ProfileSummary {
    out: String,
    rows: usize,
    interest: String,
    peak: f64,
    peak_log_lik: f64,
}

pub fn profile_cmd(a: &ProfileArgs, cfg: &OptimizerConfig) -> CliResult<Output> {
    let m = build_model(&a.model)?;
    let name = interest_name(m.as_ref())?;
    if let Some(want) = &a.interest {
        if *want != name {
            return Err(usage(format!("this model profiles `{name}`, not `{want}`")));
        }
    }
    let curve = profile_curve(m.as_ref(), &GridSpec::parse(&a.grid)?, cfg)?;
    let csv = curve.to_csv();
    match &a.out {
        None => Ok(Output::Text(csv)),
        Some(path) => {
            write_file(path, &csv)?;
            let summary = ProfileSummary {
                out: path.display().to_string(),
                rows: curve.grid.len(),
                interest: curve.interest,
                peak: curve.peak,
                peak_log_lik: curve.peak_log_lik,
            };
            json(&summary, None)
        }
    }
}

pub fn support_cmd(a: &SupportArgs, cfg: &OptimizerConfig) -> CliResult<Output> {
    let m = build_model(&a.model)?;
    json(&support_set(m.as_ref(), a.k, cfg)?, None)
}

#[derive(Serialize)]
struct LimitComparison {
    scenario: &'static str,
    config: SimulationConfig,
    #[serde(flatten)]
    distribution: EmpiricalDistribution,
    limit: LimitSpec,
    ks_distance: f64,
}

#[derive(Serialize)]
struct ConsistencySummary {
    scenario: &'static str,
    config: SimulationConfig,
    report: ConsistencyReport,
}

pub fn simulate_cmd(a: &SimulateArgs, cfg: &OptimizerConfig) -> CliResult<Output> {
    let seed = Some(a.seed);
    if a.scenario == Scenario::Consistency {
        if a.raw_csv.is_some() {
            return Err(usage("--raw-csv applies to the boundary and point-null scenarios"));
        }
        let theta0 = a.theta0.unwrap_or(0.1);
        let sim = SimulationConfig::consistency(theta0, a.sizes.clone(), a.replications.unwrap_or(2000), a.seed);
        let report = consistency_trend(&sim, cfg)?;
        return json(
            &ConsistencySummary {
                scenario: "consistency",
                config: sim,
                report,
            },
            seed,
        );
    }
    let replications = a.replications.unwrap_or(20_000);
    let (name, sim, limit) = match a.scenario {
        Scenario::Boundary => {
            if a.theta0.is_some_and(|t| t != 0.2) {
                return Err(usage("the boundary scenario fixes theta0 = 0.2"));
            }
            (
                "boundary",
                SimulationConfig::boundary(a.n, replications, a.seed),
                LimitSpec::boundary(),
            )
        }
        _ => {
            let theta0 = a.theta0.unwrap_or(0.3001);
            (
                "point-null",
                SimulationConfig::point_null(theta0, a.n, replications, a.seed),
                LimitSpec::point_null(1),
            )
        }
    };
    let dist = simulate_glr(&sim, a.n, cfg)?;
    let ks = ks_distance(&dist, &limit)?;
    if let Some(path) = &a.raw_csv {
        write_file(path, &dist.to_csv())?;
    }
    json(
        &LimitComparison {
            scenario: name,
            config: sim,
            distribution: dist,
            limit,
            ks_distance: ks,
        },
        seed,
    )
}

#[derive(Deserialize)]
struct PowerRow {
    theta: f64,
    power: f64,
}

fn read_power_table(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| usage(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["theta", "power"] {
        return Err(usage(format!(
            "{}: header must be exactly `theta,power`",
            path.display()
        )));
    }
    let mut theta = Vec::new();
    let mut power = Vec::new();
    for row in rdr.deserialize::<PowerRow>() {
        let r = row.map_err(|e| usage(format!("{}: {e}", path.display())))?;
        theta.push(r.theta);
        power.push(r.power);
    }
    Ok((theta, power))
}

/// Parses a predicate on a single real parameter into a union of intervals.
fn scalar_region(text: &str, name: &str) -> CliResult<ScalarRegion> {
    let space = ParameterSpace::scalar(name, Interval::real_line())?;
    let region = parse_region(text, &space)?;
    region
        .as_scalar(0)
        .ok_or_else(|| usage(format!("`{text}` is not a region of `{name}`")))
}

pub fn reduced_test_cmd(a: &ReducedTestArgs) -> CliResult<Output> {
    let alpha = || a.alpha.ok_or_else(|| usage("--alpha is required for this test"));
    let pf = match a.kind {
        TestKind::OneSided => PowerFunction::OneSided { alpha: alpha()? },
        TestKind::PointNullOneSided => PowerFunction::PointNullOneSided { alpha: alpha()? },
        TestKind::TwoSidedPointNull => PowerFunction::TwoSidedPointNull { alpha: alpha()? },
        TestKind::Equivalence => PowerFunction::Equivalence {
            alpha: alpha()?,
            pi_max: a
                .pi_max
                .ok_or_else(|| usage("--pi-max is required for the equivalence test"))?,
        },
        TestKind::Tabulated => {
            let path = a
                .table
                .as_deref()
                .ok_or_else(|| usage("--table is required for a tabulated test"))?;
            let (h1, h2) = match (&a.h1, &a.h2) {
                (Some(h1), Some(h2)) => (scalar_region(h1, "theta")?, scalar_region(h2, "theta")?),
                _ => return Err(usage("--h1 and --h2 are required for a tabulated test")),
            };
            let (theta, power) = read_power_table(path)?;
            PowerFunction::Tabulated { theta, power, h1, h2 }
        }
    };
    let t = match a.outcome {
        Outcome::Accept => TestOutcome::Accept,
        Outcome::Reject => TestOutcome::Reject,
    };
    json(&ReducedEvidence::new(glr_from_test(&pf, t)?), None)
}

pub fn reduced_pvalue_cmd(a: &ReducedPvalueArgs) -> CliResult<Output> {
    let r = match (&a.h1, &a.h2) {
        (Some(h1), Some(h2)) => glr_from_pvalue_general(a.u, &scalar_region(h1, "mu")?, &scalar_region(h2, "mu")?)?,
        _ => glr_from_pvalue_normal(a.u)?,
    };
    json(&ReducedEvidence::new(r), None)
}
