//! Built-in verification suites run by `agi-metrics selfcheck`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::inference::{
    infer, ols_fit, p_value_two_sided_with, pearson, regularized_incomplete_beta_with, BetaOptions,
};
use crate::ingest::{parse_fred_csv, to_fred_csv};
use crate::production::{agi_index, effective_labor, output, tfp_residual, ModelParams};
use crate::timeseries::{make_series, Frequency, Period};

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckOptions {
    /// Convergence controls handed to the incomplete-beta suite.
    pub beta: BetaOptions,
    pub seed: u64,
}

impl Default for SelfCheckOptions {
    fn default() -> Self {
        SelfCheckOptions {
            beta: BetaOptions::default(),
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            checks: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || {
            format!("{label}: got {got:e}, want {want:e} (tol {tol:e})")
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckSummary {
    pub suites: Vec<SuiteResult>,
}

impl SelfCheckSummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failed_suites(&self) -> Vec<&'static str> {
        self.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect()
    }

    /// One line per suite, plus up to three failure details for failing ones.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            if s.passed() {
                let _ = writeln!(out, "PASS {} ({} checks)", s.name, s.checks);
            } else {
                let _ = writeln!(
                    out,
                    "FAIL {} ({} of {} checks failed)",
                    s.name,
                    s.failures.len(),
                    s.checks
                );
                for f in s.failures.iter().take(3) {
                    let _ = writeln!(out, "     {f}");
                }
            }
        }
        out
    }
}

pub fn selfcheck() -> SelfCheckSummary {
    selfcheck_with(&SelfCheckOptions::default())
}

pub fn selfcheck_with(opts: &SelfCheckOptions) -> SelfCheckSummary {
    SelfCheckSummary {
        suites: vec![
            production_suite(opts.seed),
            inference_suite(opts.seed),
            beta_suite(&opts.beta),
            fred_suite(opts.seed),
        ],
    }
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..=3.0))
}

fn production_suite(seed: u64) -> SuiteResult {
    let mut s = SuiteResult::new("production");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let (a, k, l, g) = (
            log_uniform(&mut rng),
            log_uniform(&mut rng),
            log_uniform(&mut rng),
            log_uniform(&mut rng),
        );
        let alpha = rng.gen_range(0.05..0.95);
        let params = ModelParams::new(alpha).expect("alpha drawn inside (0, 1)");
        let round = output(a, k, l, g, &params).and_then(|y| {
            Ok((agi_index(y, a, k, l, &params)?, tfp_residual(y, k, l, g, &params)?))
        });
        match round {
            Ok((g2, a2)) => {
                s.close("agi round trip (rel)", (g2 - g) / g, 0.0, 1e-10);
                s.close("tfp round trip (rel)", (a2 - a) / a, 0.0, 1e-10);
            }
            Err(e) => s.check(false, || format!("round trip failed: {e}")),
        }
    }
    for l in [1.0, 50.0, 1e6] {
        for g in [0.0, 0.3, 1.0, 7.0] {
            let e = effective_labor(l, g).unwrap_or(f64::NAN);
            s.check(e == l, || format!("effective_labor({l}, {g}) = {e}"));
        }
    }
    s
}

fn inference_suite(seed: u64) -> SuiteResult {
    let mut s = SuiteResult::new("inference");
    match infer(&[1.0, 2.0, 3.0], &[2.0, 3.0, 5.0]) {
        Ok(r) => {
            s.close("slope", r.fit.slope, 1.5, 1e-12);
            s.close("intercept", r.fit.intercept, 1.0 / 3.0, 1e-12);
            s.close("pearson", r.pearson_r, 3.0 / (28.0f64 / 3.0).sqrt(), 1e-12);
            s.close("t", r.t_statistic.value(), 1.5 / (1.0f64 / 12.0).sqrt(), 1e-10);
            s.close("p", r.p_value, 0.121_037_718_323_676_73, 1e-10);
        }
        Err(e) => s.check(false, || format!("reference regression failed: {e}")),
    }

    // Uncentered normal equations solved by Cramer's rule.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x01);
    for _ in 0..100 {
        let n = rng.gen_range(3..=12);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let nf = n as f64;
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxx: f64 = x.iter().map(|v| v * v).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let det = nf * sxx - sx * sx;
        let slope = (nf * sxy - sx * sy) / det;
        let intercept = (sy - slope * sx) / nf;
        match (ols_fit(&x, &y), pearson(&x, &y)) {
            (Ok(f), Ok(r)) => {
                s.close("ols slope vs normal equations", f.slope, slope, 1e-9);
                s.close("ols intercept vs normal equations", f.intercept, intercept, 1e-9);
                if let Ok(rep) = infer(&x, &y) {
                    s.close("R² = r²", rep.r_squared, r * r, 1e-12);
                }
            }
            (Err(e), _) | (_, Err(e)) => s.check(false, || format!("random regression failed: {e}")),
        }
    }
    s
}

fn beta_suite(opts: &BetaOptions) -> SuiteResult {
    let mut s = SuiteResult::new("incomplete-beta");
    let p = |t: f64, df: usize| p_value_two_sided_with(t, df, opts).unwrap_or(f64::NAN);

    for (t, df, exact) in [
        (2.228, 10, 0.050_011_771_817_111_38),
        (12.706, 1, 0.050_000_802_358_133_19),
        (2.042, 30, 0.050_028_670_656_197_88),
    ] {
        s.close(&format!("p({t}, {df}) vs 0.05"), p(t, df), 0.05, 5e-4);
        s.close(&format!("p({t}, {df}) vs quadrature reference"), p(t, df), exact, 1e-10);
    }
    for i in 0..=500 {
        let t = i as f64 * 0.1;
        s.close(&format!("Cauchy p({t})"), p(t, 1), 1.0 - 2.0 / PI * t.atan(), 1e-10);
    }
    let shapes = [0.1, 0.5, 1.0, 1.5, 2.0, 3.5, 5.0, 10.0, 25.0, 60.0];
    for &a in &shapes {
        for &b in &shapes {
            for j in 1..=9 {
                let x = j as f64 / 10.0;
                let lhs = regularized_incomplete_beta_with(x, a, b, opts);
                let rhs = regularized_incomplete_beta_with(1.0 - x, b, a, opts);
                match (lhs, rhs) {
                    (Ok(l), Ok(r)) => s.close(&format!("I_{x}({a},{b}) symmetry"), l + r, 1.0, 1e-12),
                    (Err(e), _) | (_, Err(e)) => s.check(false, || e.to_string()),
                }
            }
        }
    }
    for (x, a, b, want) in [
        (0.3, 2.0, 5.0, 0.579825),
        (0.7, 0.5, 0.5, 0.630_989_880_434_454_6),
        (0.9, 10.0, 3.0, 0.889_130_022_255),
        (0.999, 50.0, 0.5, 0.752_369_019_965_376_8),
    ] {
        let got = regularized_incomplete_beta_with(x, a, b, opts).unwrap_or(f64::NAN);
        s.close(&format!("I_{x}({a},{b}) reference"), got, want, 1e-12);
    }
    s
}

fn fred_suite(seed: u64) -> SuiteResult {
    let mut s = SuiteResult::new("fred-round-trip");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x02);
    for freq in [Frequency::Annual, Frequency::Quarterly, Frequency::Monthly] {
        for _ in 0..20 {
            let step = freq.months() as i64;
            let start = rng.gen_range(1900i64..2050) * 12;
            let n = rng.gen_range(2..40);
            let mut points = Vec::new();
            for i in 0..n {
                let keep = rng.gen_bool(0.8);
                let value = rng.gen_range(-1e9..1e9);
                if keep || i == 0 || i == n - 1 {
                    let m = start + i * step;
                    let p = Period::containing(freq, (m / 12) as i32, (m % 12 + 1) as u32);
                    points.push((p, value));
                }
            }
            let series = match make_series("RT", "", freq, points) {
                Ok(s) => s,
                Err(e) => {
                    s.check(false, || format!("could not build series: {e}"));
                    continue;
                }
            };
            let text = to_fred_csv(&series);
            match parse_fred_csv(text.as_bytes()) {
                Ok(back) => s.check(back == series, || format!("{freq} series changed on round trip")),
                Err(e) => s.check(false, || format!("re-parse failed: {e}")),
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_build_passes() {
        let summary = selfcheck();
        assert!(summary.passed(), "{}", summary.render());
        assert_eq!(summary.suites.len(), 4);
    }

    #[test]
    fn repeated_runs_are_identical() {
        assert_eq!(selfcheck(), selfcheck());
    }

    #[test]
    fn corrupted_beta_tolerance_fails_beta_suite() {
        let opts = SelfCheckOptions {
            beta: BetaOptions {
                epsilon: 0.5,
                ..BetaOptions::default()
            },
            ..SelfCheckOptions::default()
        };
        let summary = selfcheck_with(&opts);
        assert!(!summary.passed());
        assert_eq!(summary.failed_suites(), vec!["incomplete-beta"]);
        assert!(summary.render().contains("FAIL incomplete-beta"));
    }
}
