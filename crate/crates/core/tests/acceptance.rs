//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use gll_core::asymptotics::{consistency_trend, ks_distance, simulate_glr, LimitSpec, SimulationConfig};
use gll_core::likelihood::{
    evidence_vs_complement, glr, k_star, min_supported_superset_check, profile_curve, sup_log_lik, support_set,
    GridSpec, LikelihoodModel, Offset,
};
use gll_core::models::{
    BinomialData, BinomialModel, BivariateInterest, BivariateNormalModel, BivariateNormalParams, PairedSample,
    TwoBinomialData, TwoBinomialModel,
};
use gll_core::optimize::OptimizerConfig;
use gll_core::predicate::parse_region;
use gll_core::reduced::{glr_from_pvalue_normal, glr_from_test, PowerFunction, TestOutcome};
use gll_core::region::{Interval, Region, ScalarRegion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(l) = limit {
        if took > l {
            o.pass = false;
            o.detail.push_str(&format!("; runtime {took:.2?} exceeds {l:?}"));
        }
    }
    println!(
        "[{}] {:>2} {:<34} {} ({:.2?})",
        if o.pass { "PASS" } else { "FAIL" },
        id,
        name,
        o.detail,
        took
    );
    o.pass
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

fn binom(x: u64, n: u64) -> BinomialModel {
    BinomialModel::new(BinomialData::new(x, n).unwrap())
}

fn region(m: &dyn LikelihoodModel, text: &str) -> Region {
    parse_region(text, m.space()).unwrap()
}

fn c1() -> Outcome {
    let m = binom(9, 17);
    let r = glr(&m, &region(&m, "theta > 0.2"), &region(&m, "theta <= 0.2"), &cfg()).unwrap();
    let exact = (9.0 * (9.0f64 / 17.0).ln() + 8.0 * (8.0f64 / 17.0).ln() - 9.0 * 0.2f64.ln() - 8.0 * 0.8f64.ln()).exp();
    let pass = (89.5..=92.5).contains(&r.glr) && (r.glr / exact - 1.0).abs() < 1e-9;
    outcome(
        pass,
        format!(
            "GLR(theta > 0.2 : theta <= 0.2) = {:.6}, closed form {:.6}",
            r.glr, exact
        ),
    )
}

fn c2() -> Outcome {
    let m = TwoBinomialModel::new(TwoBinomialData::new(83, 88, 69, 76).unwrap());
    let ni = evidence_vs_complement(&m, &region(&m, "delta > -0.1"), &cfg()).unwrap();
    let sup = evidence_vs_complement(&m, &region(&m, "delta > 0"), &cfg()).unwrap();
    let pass = (ni.glr / 138.0 - 1.0).abs() <= 0.05 && (sup.glr - 1.4).abs() <= 0.1;
    outcome(
        pass,
        format!("non-inferiority GLR = {:.4}, superiority GLR = {:.4}", ni.glr, sup.glr),
    )
}

/// Per-pair bivariate normal log-density, written independently of the library.
fn density_sum(yt: &[f64], yr: &[f64], mt: f64, mr: f64, st: f64, sr: f64, rho: f64) -> f64 {
    let one_m = 1.0 - rho * rho;
    yt.iter()
        .zip(yr)
        .map(|(t, r)| {
            let a = (t - mt) / st;
            let b = (r - mr) / sr;
            -(2.0 * std::f64::consts::PI).ln()
                - st.ln()
                - sr.ln()
                - 0.5 * one_m.ln()
                - (a * a - 2.0 * rho * a * b + b * b) / (2.0 * one_m)
        })
        .sum()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unrestricted maximum of the log-likelihood from divisor-n moments.
fn global_max(yt: &[f64], yr: &[f64]) -> f64 {
    let (mt, mr) = (mean(yt), mean(yr));
    let n = yt.len() as f64;
    let stt = yt.iter().map(|v| (v - mt).powi(2)).sum::<f64>() / n;
    let srr = yr.iter().map(|v| (v - mr).powi(2)).sum::<f64>() / n;
    let str_ = yt.iter().zip(yr).map(|(a, b)| (a - mt) * (b - mr)).sum::<f64>() / n;
    density_sum(yt, yr, mt, mr, stt.sqrt(), srr.sqrt(), str_ / (stt * srr).sqrt())
}

/// Normalized mean-difference profile from the paired differences: `-(n/2) ln(1 + t²/(n-1))`.
fn mean_diff_oracle(yt: &[f64], yr: &[f64], gamma: f64) -> f64 {
    let d: Vec<f64> = yt.iter().zip(yr).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let sd = (d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = (m - gamma) / (sd / n.sqrt());
    -(n / 2.0) * (1.0 + t * t / (n - 1.0)).ln()
}

/// Normalized sd-ratio profile: means at the sample means, zooming grid over `(σ_R, ρ)`.
fn sd_ratio_oracle(yt: &[f64], yr: &[f64], gamma: f64, top: f64) -> f64 {
    let (mt, mr) = (mean(yt), mean(yr));
    let sd = |v: &[f64], m: f64| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    let (s_t, s_r) = (sd(yt, mt), sd(yr, mr));
    let (mut lo_s, mut hi_s) = (s_r.min(s_t / gamma) / 4.0, s_r.max(s_t / gamma) * 4.0);
    let (mut lo_r, mut hi_r) = (-0.9999, 0.9999);
    let steps = 61;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for _ in 0..40 {
        for i in 0..steps {
            let sr = lo_s + (hi_s - lo_s) * i as f64 / (steps - 1) as f64;
            for j in 0..steps {
                let rho = lo_r + (hi_r - lo_r) * j as f64 / (steps - 1) as f64;
                let v = density_sum(yt, yr, mt, mr, gamma * sr, sr, rho);
                if v > best.0 {
                    best = (v, sr, rho);
                }
            }
        }
        let (ws, wr) = ((hi_s - lo_s) / 10.0, (hi_r - lo_r) / 10.0);
        lo_s = (best.1 - ws).max(1e-12);
        hi_s = best.1 + ws;
        lo_r = (best.2 - wr).max(-0.999_999);
        hi_r = (best.2 + wr).min(0.999_999);
    }
    best.0 - top
}

fn c3() -> Outcome {
    let truth = BivariateNormalParams {
        mu_t: 4.05,
        mu_r: 4.0,
        sigma_t: 0.28,
        sigma_r: 0.22,
        rho: 0.75,
    };
    let sample = PairedSample::synthetic(40, &truth, 2024).unwrap();
    let (yt, yr) = (sample.y_t().to_vec(), sample.y_r().to_vec());
    let top = global_max(&yt, &yr);

    let md = BivariateNormalModel::new(sample.clone(), BivariateInterest::MeanDiff);
    let g = md.gamma_hat();
    let curve = profile_curve(&md, &GridSpec::new(g - 0.25, g + 0.25, 101).unwrap(), &cfg()).unwrap();
    let md_err = curve
        .grid
        .iter()
        .zip(&curve.normalized_lik)
        .map(|(&x, &v)| (v.ln() - mean_diff_oracle(&yt, &yr, x)).abs())
        .fold(0.0, f64::max);

    let sr = BivariateNormalModel::new(sample, BivariateInterest::SdRatio);
    let r = sr.gamma_hat();
    let curve = profile_curve(&sr, &GridSpec::new(0.6 * r, 1.6 * r, 101).unwrap(), &cfg()).unwrap();
    let sr_err = curve
        .grid
        .iter()
        .zip(&curve.normalized_lik)
        .map(|(&x, &v)| (v.ln() - sd_ratio_oracle(&yt, &yr, x, top)).abs())
        .fold(0.0, f64::max);

    outcome(
        md_err < 1e-6 && sr_err < 1e-5,
        format!("max |error|: mean-diff {md_err:.2e} (< 1e-6), sd-ratio {sr_err:.2e} (< 1e-5) over 101 points"),
    )
}

fn c4() -> Outcome {
    let t = |pf: PowerFunction, o| glr_from_test(&pf, o).unwrap();
    let (a, b) = (0.05f64, 0.025f64);
    let checks = [
        (
            "one-sided reject 0.05",
            t(PowerFunction::OneSided { alpha: a }, TestOutcome::Reject),
            1.0 / a,
            20.0,
        ),
        (
            "one-sided reject 0.025",
            t(PowerFunction::OneSided { alpha: b }, TestOutcome::Reject),
            1.0 / b,
            40.0,
        ),
        (
            "one-sided accept 0.05",
            t(PowerFunction::OneSided { alpha: a }, TestOutcome::Accept),
            1.0 - a,
            0.95,
        ),
        (
            "point-null accept",
            t(PowerFunction::PointNullOneSided { alpha: a }, TestOutcome::Accept),
            1.0,
            1.0,
        ),
        (
            "two-sided point-null accept",
            t(PowerFunction::TwoSidedPointNull { alpha: a }, TestOutcome::Accept),
            1.0,
            1.0,
        ),
        (
            "equivalence reject 0.05/0.9",
            t(
                PowerFunction::Equivalence { alpha: a, pi_max: 0.9 },
                TestOutcome::Reject,
            ),
            0.9 / a,
            0.9 / a,
        ),
    ];
    let bad: Vec<&str> = checks
        .iter()
        .filter(|(_, got, formula, literal)| got.to_bits() != formula.to_bits() || got.to_bits() != literal.to_bits())
        .map(|c| c.0)
        .collect();
    let shown: Vec<String> = checks.iter().map(|c| format!("{}", c.1)).collect();
    outcome(
        bad.is_empty(),
        format!(
            "values {} {}",
            shown.join(", "),
            if bad.is_empty() {
                String::new()
            } else {
                format!("mismatch: {bad:?}")
            }
        ),
    )
}

fn c5() -> Outcome {
    let half = glr_from_pvalue_normal(0.5).unwrap();
    let sym = (1..=99)
        .map(|i| {
            let u = i as f64 / 100.0;
            (glr_from_pvalue_normal(u).unwrap() * glr_from_pvalue_normal(1.0 - u).unwrap() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    // exp(Φ⁻¹(0.95)²/2) evaluated with 40-digit arithmetic
    let reference = 3.868_132_092_353_787; // 3.868132092353786742726...
    let rel = (glr_from_pvalue_normal(0.05).unwrap() / reference - 1.0).abs();
    outcome(
        half == 1.0 && sym < 1e-12 && rel < 1e-8,
        format!("r(0.5) = {half}, max |r(u)r(1-u) - 1| = {sym:.1e}, r(0.05) rel. error {rel:.1e}"),
    )
}

fn random_region(m: &BinomialModel, rng: &mut ChaCha8Rng) -> Region {
    let interval = |rng: &mut ChaCha8Rng| {
        let a: f64 = rng.random_range(0.02..0.98);
        let b: f64 = rng.random_range(0.02..0.98);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Interval::new(lo, hi, rng.random(), rng.random())
    };
    let mut set = ScalarRegion::from_interval(interval(rng));
    if rng.random_bool(0.3) {
        set = set.union(&ScalarRegion::from_interval(interval(rng)));
    }
    Region::constrain(m.space(), "theta", &set).unwrap()
}

/// Largest k with `S_k ⊆ A`, by bisection on `ln k` using support-set containment.
fn k_star_by_bisection(m: &BinomialModel, a: &Region, upper: f64, cfg: &OptimizerConfig) -> f64 {
    let set = a.as_scalar(0).unwrap();
    let inside = |k: f64| support_set(m, k, cfg).unwrap().intervals.is_subset_of(&set);
    let (mut lo, mut hi) = (0.0f64, upper.ln());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inside(mid.exp()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fine = OptimizerConfig {
        grid_points: 10_000,
        ..cfg()
    };
    let (mut premise_cases, mut superset_violations, mut kstar_cases, mut kstar_bad) = (0, 0, 0, 0);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=50u64);
        let x = rng.random_range(0..=n);
        let m = binom(x, n);
        let s = random_region(&m, &mut rng);
        let r = evidence_vs_complement(&m, &s, &cfg()).unwrap();
        if r.glr > 1.0 + 1e-9 {
            // k at or below the ratio, including the ratio itself
            let k = if rng.random_bool(0.25) {
                r.glr
            } else {
                1.0 + (r.glr - 1.0) * rng.random::<f64>()
            };
            if k > 1.0 {
                let check = min_supported_superset_check(&m, &s, k, &fine).unwrap();
                premise_cases += 1;
                if !check.holds() {
                    superset_violations += 1;
                }
            }
            let direct = k_star(&m, &s, &cfg()).unwrap();
            let bisected = k_star_by_bisection(&m, &s, 10.0 * direct, &cfg());
            let rel = (bisected / direct - 1.0).abs();
            worst_rel = worst_rel.max(rel);
            kstar_cases += 1;
            if rel > 1e-6 {
                kstar_bad += 1;
            }
        } else if k_star(&m, &s, &cfg()).unwrap() != 1.0 {
            kstar_bad += 1;
        }
    }
    outcome(
        superset_violations == 0 && kstar_bad == 0,
        format!(
            "S_k ⊆ S violations {superset_violations}/{premise_cases}, k* mismatches {kstar_bad} (r_A > 1 in {kstar_cases}, worst rel. {worst_rel:.1e})"
        ),
    )
}

fn c7() -> Outcome {
    let sim = SimulationConfig::boundary(2500, 20_000, 7);
    let e = simulate_glr(&sim, 2500, &cfg()).unwrap();
    let ks = ks_distance(&e, &LimitSpec::boundary()).unwrap();
    outcome(
        ks < 0.02 && (0.48..=0.52).contains(&e.fraction_positive),
        format!(
            "KS = {ks:.4} (< 0.02), fraction positive = {:.4}, failures {}",
            e.fraction_positive, e.failures
        ),
    )
}

fn c8() -> Outcome {
    // n·θ₀ = 750.25 keeps the binomial lattice off the atom at zero
    let sim = SimulationConfig::point_null(0.3001, 2500, 20_000, 8);
    let e = simulate_glr(&sim, 2500, &cfg()).unwrap();
    let ks = ks_distance(&e, &LimitSpec::point_null(1)).unwrap();
    outcome(
        ks < 0.02,
        format!("theta0 = 0.3001, KS = {ks:.4} (< 0.02), failures {}", e.failures),
    )
}

fn c9() -> Outcome {
    let up = consistency_trend(&SimulationConfig::consistency(0.1, vec![50, 200, 800], 2000, 9), &cfg()).unwrap();
    let down = consistency_trend(&SimulationConfig::consistency(0.5, vec![50, 200, 800], 2000, 9), &cfg()).unwrap();
    let fmt = |v: &[f64]| v.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(" < ");
    let fmt_down = |v: &[f64]| v.iter().map(|m| format!("{m:.3}")).collect::<Vec<_>>().join(" > ");
    outcome(
        up.monotone && down.monotone && up.predicted != down.predicted,
        format!(
            "theta0 0.1 medians {} ({:?}); theta0 0.5 medians {} ({:?})",
            fmt(&up.medians),
            up.predicted,
            fmt_down(&down.medians),
            down.predicted
        ),
    )
}

fn random_sub(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (f64, f64) {
    let a = rng.random_range(lo..hi);
    let b = rng.random_range(lo..hi);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Checks every core invariant on one model; returns the names of those violated.
fn invariant_case<M: LikelihoodModel + Clone>(m: &M, rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let c = cfg();
    let mut broken = Vec::new();
    let name = m.space().params()[0].name.clone();
    let dom = *m.space().domain(0);
    let (a, b) = random_sub(rng, dom.lo, dom.hi);
    let (lo2, hi2) = random_sub(rng, dom.lo, dom.hi);
    let h1 = region(m, &format!("{name} >= {a} and {name} <= {b}"));
    let h2 = region(m, &format!("{name} >= {lo2} and {name} <= {hi2}"));
    let wide = region(
        m,
        &format!(
            "{name} >= {} and {name} <= {}",
            (a - 0.1).max(dom.lo),
            (b + 0.1).min(dom.hi)
        ),
    );

    let r12 = glr(m, &h1, &h2, &c).unwrap();
    let r21 = glr(m, &h2, &h1, &c).unwrap();
    let same = |x: f64, y: f64, tol: f64| if x.is_finite() { (x - y).abs() < tol } else { x == y };
    if !same(r12.log_glr, -r21.log_glr, 1e-9) {
        broken.push("reciprocity");
    }

    let s_small = sup_log_lik(m, &h1, &c).unwrap().max_value;
    let s_wide = sup_log_lik(m, &wide, &c).unwrap().max_value;
    if !(s_small <= s_wide + 1e-9 || s_small == f64::NEG_INFINITY) {
        broken.push("sup monotonicity");
    }
    if !(glr(m, &h1, &wide, &c).unwrap().log_glr <= 1e-9) {
        broken.push("subset GLR <= 1");
    }

    let shifted = Offset {
        inner: m.clone(),
        offset: rng.random_range(-100.0..100.0),
    };
    if !same(glr(&shifted, &h1, &h2, &c).unwrap().log_glr, r12.log_glr, 1e-8) {
        broken.push("offset invariance");
    }

    let k1 = rng.random_range(1.5..50.0f64);
    let k2 = k1 * rng.random_range(1.0..20.0f64);
    let s1 = support_set(m, k1, &c).unwrap();
    let s2 = support_set(m, k2, &c).unwrap();
    if !s1.intervals.is_subset_of(&s2.intervals) {
        broken.push("support nesting");
    }
    broken
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad = 0;
    let mut examples = Vec::new();
    for case in 0..1000 {
        let broken = if case % 4 == 3 {
            let (n1, n2) = (rng.random_range(5..=60u64), rng.random_range(5..=60u64));
            let (x1, x2) = (rng.random_range(0..=n1), rng.random_range(0..=n2));
            let m = TwoBinomialModel::new(TwoBinomialData::new(x1, n1, x2, n2).unwrap());
            invariant_case(&m, &mut rng)
        } else {
            let n = rng.random_range(1..=60u64);
            let x = rng.random_range(0..=n);
            invariant_case(&binom(x, n), &mut rng)
        };
        if !broken.is_empty() {
            bad += 1;
            if examples.len() < 5 {
                examples.push(format!("case {case}: {}", broken.join(", ")));
            }
        }
    }
    outcome(
        bad == 0,
        format!("reciprocity, sup monotonicity, subset GLR <= 1, offset invariance, support nesting: {bad}/1000 cases violated {examples:?}"),
    )
}

fn main() {
    let sec = Duration::from_secs;
    let results = [
        run(1, "binomial example", Some(sec(1)), c1),
        run(2, "non-inferiority example", Some(sec(1)), c2),
        run(3, "bivariate normal profiles", None, c3),
        run(4, "reduced-data table", None, c4),
        run(5, "p-value formula", None, c5),
        run(6, "support-set properties", Some(sec(30)), c6),
        run(7, "boundary limit", Some(sec(60)), c7),
        run(8, "point-null limit", None, c8),
        run(9, "consistency", None, c9),
        run(10, "core invariants", None, c10),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
