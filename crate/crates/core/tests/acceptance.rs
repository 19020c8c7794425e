//! Acceptance suite. Prints one PASS/FAIL line per criterion:
//!
//! ```text
//! cargo test -p agi-metrics --test acceptance -- --nocapture
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use agi_metrics::inference::{
    infer, ols_fit, p_value_two_sided, pearson, regularized_incomplete_beta, student_t_cdf,
    InferenceReport,
};
use agi_metrics::ingest::{load_config_file, parse_fred_csv, to_fred_csv, AlphaSetting, Orientation, SourceFormat};
use agi_metrics::pipeline::{analyze, ModelChoices};
use agi_metrics::production::{agi_index, effective_labor, output, synthesize_panel, tfp_residual, ModelParams};

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { name, pass, detail }
}

fn snapshot_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/snapshot")
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..=3.0))
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + inner + f(b)) * h / 3.0
}

/// Two-sided Student-t tail by quadrature. Substituting s = √ν·tan θ turns
/// the density into cos^(ν−1) θ on [0, π/2], so no gamma functions are needed.
fn t_tail_quadrature(t: f64, df: usize) -> f64 {
    let kernel = |th: f64| th.cos().powi(df as i32 - 1);
    let theta = (t.abs() / (df as f64).sqrt()).atan();
    const PANELS: usize = 20_000;
    simpson(kernel, theta, FRAC_PI_2, PANELS) / simpson(kernel, 0.0, FRAC_PI_2, PANELS)
}

/// Running maximum of absolute errors in which NaN counts as infinitely bad.
fn worse(acc: f64, err: f64) -> f64 {
    if err.is_nan() {
        f64::INFINITY
    } else {
        acc.max(err.abs())
    }
}

/// R² from the fitted residuals, 1 − SSR/SST, independent of the Pearson path.
fn r_squared_from_residuals(rep: &InferenceReport) -> f64 {
    1.0 - rep.fit.residual_sum_of_squares() / rep.fit.syy
}

fn round_trip_inversion(draws: &[(f64, f64, f64, f64, f64)]) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut errors = 0;
    for &(a, k, l, g, alpha) in draws {
        let params = ModelParams::new(alpha).unwrap();
        match output(a, k, l, g, &params).and_then(|y| agi_index(y, a, k, l, &params)) {
            Ok(g2) => worst = worse(worst, (g2 - g) / g),
            Err(_) => errors += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        "round-trip inversion",
        errors == 0 && worst <= 1e-10 && elapsed < Duration::from_secs(1),
        format!(
            "{} draws, max rel err {worst:.3e} (tol 1e-10), {errors} errors, {:.1} ms (limit 1000 ms)",
            draws.len(),
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn residual_round_trip(draws: &[(f64, f64, f64, f64, f64)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut errors = 0;
    for &(a, k, l, g, alpha) in draws {
        let params = ModelParams::new(alpha).unwrap();
        match output(a, k, l, g, &params).and_then(|y| tfp_residual(y, k, l, g, &params)) {
            Ok(a2) => worst = worse(worst, (a2 - a) / a),
            Err(_) => errors += 1,
        }
    }
    outcome(
        "residual round trip",
        errors == 0 && worst <= 1e-10,
        format!("{} draws, max rel err {worst:.3e} (tol 1e-10), {errors} errors", draws.len()),
    )
}

fn effective_labor_identity() -> Outcome {
    let mut cells = 0;
    let mut bad = Vec::new();
    for l in [1.0, 50.0, 1e6] {
        for g in [0.0, 0.3, 1.0, 7.0] {
            cells += 1;
            match effective_labor(l, g) {
                Ok(e) if e == l => {}
                other => bad.push(format!("({l}, {g}) -> {other:?}")),
            }
        }
    }
    outcome(
        "effective labor identity",
        bad.is_empty(),
        format!("{cells} grid cells, exact equality; mismatches: {bad:?}"),
    )
}

fn ols_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    let (mut worst_coef, mut worst_r2) = (0.0f64, 0.0f64);
    let mut errors = 0;
    for _ in 0..100 {
        let n = rng.gen_range(3..=12);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let y: Vec<f64> = x.iter().map(|xi| 0.7 * xi + rng.gen_range(-5.0..5.0)).collect();
        // Normal equations [n Σx; Σx Σx²]·[b0; b1] = [Σy; Σxy] by elimination.
        let nf = n as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let factor = sx / nf;
        let b1 = (sxy - factor * sy) / (sxx - factor * sx);
        let b0 = (sy - sx * b1) / nf;
        match (ols_fit(&x, &y), infer(&x, &y), pearson(&x, &y)) {
            (Ok(fit), Ok(rep), Ok(r)) => {
                worst_coef = worse(worse(worst_coef, fit.slope - b1), fit.intercept - b0);
                worst_r2 = worse(
                    worse(worst_r2, rep.r_squared - r * r),
                    r_squared_from_residuals(&rep) - r * r,
                );
            }
            _ => errors += 1,
        }
    }
    outcome(
        "OLS oracle equivalence",
        errors == 0 && worst_coef <= 1e-9 && worst_r2 <= 1e-12,
        format!(
            "100 datasets, max |coef - oracle| {worst_coef:.3e} (tol 1e-9), max |R² - r²| {worst_r2:.3e} (tol 1e-12), {errors} errors"
        ),
    )
}

fn p_value_oracle() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for (t, df) in [(2.228, 10), (12.706, 1), (2.042, 30)] {
        let p = p_value_two_sided(t, df).unwrap_or(f64::NAN);
        let q = t_tail_quadrature(t, df);
        let ok = (p - 0.05).abs() <= 5e-4 && (p - q).abs() <= 1e-10;
        pass &= ok;
        notes.push(format!("p({t},{df})={p:.6}"));
    }
    let mut cauchy = 0.0f64;
    for i in 0..=5000 {
        let t = i as f64 * 0.01;
        let p = p_value_two_sided(t, 1).unwrap_or(f64::NAN);
        cauchy = worse(cauchy, p - (1.0 - 2.0 / PI * t.atan()));
    }
    pass &= cauchy <= 1e-10;
    let shapes = [0.1, 0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 10.0, 25.0, 60.0];
    let mut symmetry = 0.0f64;
    for &a in &shapes {
        for &b in &shapes {
            for j in 1..=9 {
                let x = j as f64 / 10.0;
                let l = regularized_incomplete_beta(x, a, b).unwrap_or(f64::NAN);
                let r = regularized_incomplete_beta(1.0 - x, b, a).unwrap_or(f64::NAN);
                symmetry = worse(symmetry, l + r - 1.0);
            }
        }
    }
    pass &= symmetry <= 1e-12;
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(1);
    outcome(
        "p-value oracle",
        pass,
        format!(
            "{} (each 0.0500 ± 0.0005, quadrature agreement 1e-10); Cauchy max err {cauchy:.3e} over t in [0, 50] (tol 1e-10); \
             beta symmetry max err {symmetry:.3e} over 10x10x9 grid (tol 1e-12); {:.1} ms (limit 1000 ms)",
            notes.join(", "),
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

/// Relative 1e-8, capped at 1e-10 absolute, so that tiny tail probabilities
/// are still compared meaningfully.
fn p_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10_f64.min(1e-8 * b.abs().max(f64::MIN_POSITIVE) + f64::MIN_POSITIVE)
}

/// Checks a single regression for slope-within-3-SE and internal consistency
/// of r, R², t and p.
fn check_synthetic(rep: &InferenceReport, target: f64) -> (bool, String) {
    let fit = &rep.fit;
    let se = fit.slope_standard_error();
    let dev = (fit.slope - target).abs();
    let within = dev <= 3.0 * se;
    let r = rep.pearson_r;
    let r2_ok = (rep.r_squared - r * r).abs() <= 1e-12
        && (r_squared_from_residuals(rep) - r * r).abs() <= 1e-12;
    let df = fit.degrees_of_freedom();
    let t = fit.slope / se;
    let p_cdf = (2.0 * student_t_cdf(-t.abs(), df).unwrap_or(f64::NAN)).max(f64::MIN_POSITIVE);
    let p_quad = t_tail_quadrature(t, df).max(f64::MIN_POSITIVE);
    let p_ok = rep.degrees_of_freedom == df
        && p_close(rep.p_value, p_cdf)
        && p_close(rep.p_value, p_quad)
        && (rep.perfect_fit || (rep.t_statistic.value() - t).abs() <= 1e-9 * t.abs());
    (
        within && r2_ok && p_ok,
        format!(
            "slope {:.15} vs {target}, |dev| {dev:.3e}, 3·SE {:.3e}; r {r:.12}, R²=r² {r2_ok}; \
             t {t:.6e}, df {df}, p {:.6e} (t-CDF {p_cdf:.6e}, quadrature {p_quad:.6e}), perfect_fit {}",
            fit.slope,
            3.0 * se,
            rep.p_value,
            rep.perfect_fit
        ),
    )
}

fn synthetic_panel(noisy_tfp: bool) -> agi_metrics::timeseries::AlignedPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shock = Normal::new(0.0, 0.05).unwrap();
    let n = 30;
    let years: Vec<i32> = (2000..2000 + n).collect();
    let agi: Vec<f64> = (0..n)
        .map(|i| (0.04 * i as f64 + shock.sample(&mut rng)).exp())
        .collect();
    let a: Vec<f64> = (0..n)
        .map(|_| if noisy_tfp { 1.2 * shock.sample(&mut rng).exp() } else { 1.2 })
        .collect();
    let k = vec![500.0; n as usize];
    let l = vec![80.0; n as usize];
    synthesize_panel(&years, &a, &k, &l, &agi, &ModelParams::new(0.5).unwrap()).unwrap()
}

fn synthetic_analogue(noisy_tfp: bool) -> Outcome {
    let choices = ModelChoices {
        alpha: AlphaSetting::Fixed(0.5),
        orientation: Orientation::GdpOnAgi,
        ..ModelChoices::default()
    };
    let name = if noisy_tfp {
        "synthetic analogue, noisy tfp (supplementary)"
    } else {
        "synthetic analogue"
    };
    match analyze(&synthetic_panel(noisy_tfp), &choices) {
        Ok(analysis) => {
            let rep = &analysis.regression_for(Orientation::GdpOnAgi).unwrap().report;
            let (pass, detail) = check_synthetic(rep, 0.5);
            outcome(name, pass, detail)
        }
        Err(e) => outcome(name, false, format!("analysis failed: {e}")),
    }
}

fn reported_determination() -> Outcome {
    // Two centered, orthogonal unit vectors mixed so the sample correlation is exactly 0.854.
    let u = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let v = [2.0, -1.0, -2.0, -1.0, 2.0];
    let norm = |w: &[f64]| w.iter().map(|a| a * a).sum::<f64>().sqrt();
    let (nu, nv) = (norm(&u), norm(&v));
    let r_target: f64 = 0.854;
    let s = (1.0 - r_target * r_target).sqrt();
    let y: Vec<f64> = u
        .iter()
        .zip(&v)
        .map(|(a, b)| r_target * a / nu + s * b / nv)
        .collect();
    match infer(&u, &y) {
        Ok(rep) => {
            let r2 = rep.r_squared;
            let pct = (r2 * 100.0).round();
            let four = (r2 * 1e4).round() / 1e4;
            let pass = (rep.pearson_r - r_target).abs() <= 1e-12
                && (r2 - r_target * r_target).abs() <= 1e-12
                && (r_squared_from_residuals(&rep) - r2).abs() <= 1e-12
                && four == 0.7293
                && pct == 73.0;
            outcome(
                "reported determination",
                pass,
                format!("r {:.12}, R² {r2:.12} -> {four} -> {pct}%", rep.pearson_r),
            )
        }
        Err(e) => outcome("reported determination", false, format!("inference failed: {e}")),
    }
}

fn golden_determinism(suite_start: Instant) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_agi-metrics");
    let config = snapshot_dir().join("config.json");
    let golden = std::fs::read(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/snapshot_report.json"))
        .expect("golden report present");
    let mut identical = 0;
    for _ in 0..5 {
        let out = Command::new(bin)
            .args(["--quiet", "run", "--config"])
            .arg(&config)
            .output()
            .expect("binary runs");
        if out.status.success() && out.stdout == golden {
            identical += 1;
        }
    }
    let selfcheck = Command::new(bin)
        .args(["--quiet", "selfcheck"])
        .status()
        .expect("binary runs");
    let elapsed = suite_start.elapsed();
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    outcome(
        "golden-file determinism",
        identical == 5 && selfcheck.code() == Some(0) && elapsed < Duration::from_secs(10),
        format!(
            "{identical}/5 {profile} runs byte-identical to the release-captured golden ({} bytes); \
             selfcheck exit {:?}; suite runtime {:.2} s (limit 10 s)",
            golden.len(),
            selfcheck.code(),
            elapsed.as_secs_f64()
        ),
    )
}

fn ingestion_round_trip() -> Outcome {
    let config = load_config_file(&snapshot_dir().join("config.json")).expect("snapshot config");
    let mut checked = Vec::new();
    let mut bad = Vec::new();
    for src in config.sources.iter().filter(|s| s.format == SourceFormat::FredCsv) {
        let path = config.resolve(&src.path);
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let bytes = std::fs::read(&path).expect("snapshot file readable");
        let result = parse_fred_csv(&bytes)
            .and_then(|s| Ok((parse_fred_csv(to_fred_csv(&s).as_bytes())?, s)));
        match result {
            Ok((back, first)) if back == first => checked.push(format!("{name} ({} obs)", first.len())),
            Ok(_) => bad.push(format!("{name}: series changed")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    outcome(
        "ingestion round trip",
        bad.is_empty() && checked.len() == 4,
        format!("identical: {}; failures: {bad:?}", checked.join(", ")),
    )
}

#[test]
fn acceptance_criteria() {
    let suite_start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let draws: Vec<_> = (0..1000)
        .map(|_| {
            (
                log_uniform(&mut rng),
                log_uniform(&mut rng),
                log_uniform(&mut rng),
                log_uniform(&mut rng),
                rng.gen_range(0.05..=0.95),
            )
        })
        .collect();
    let outcomes = vec![
        round_trip_inversion(&draws),
        residual_round_trip(&draws),
        effective_labor_identity(),
        ols_oracle(&mut rng),
        p_value_oracle(),
        synthetic_analogue(false),
        synthetic_analogue(true),
        reported_determination(),
        ingestion_round_trip(),
        golden_determinism(suite_start),
    ];
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.pass).collect();
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    assert!(
        failed.is_empty(),
        "failed: {:?}",
        failed.iter().map(|o| (o.name, &o.detail)).collect::<Vec<_>>()
    );
}
