//! Simple least squares with correlation, determination, slope t-test and a
//! two-sided Student-t p-value.
//!
//! All sums are mean-centered in a second pass over the data; no single-pass
//! moment formulas are used.

mod special;

pub use special::{
    ln_beta, ln_gamma, regularized_incomplete_beta, regularized_incomplete_beta_with, BetaOptions,
};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Minimum sample for a slope t-test (df = n - 2 >= 1).
pub const MIN_FIT_LEN: usize = 3;

/// A fit counts as perfect once the RMS residual is below this fraction of
/// the RMS of the dependent variable.
pub const PERFECT_FIT_RELATIVE_RMS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub x_mean: f64,
    pub y_mean: f64,
    pub residuals: Vec<f64>,
    /// Σ(x - x̄)²
    pub sxx: f64,
    /// Σ(y - ȳ)²
    pub syy: f64,
    pub n: usize,
}

impl RegressionFit {
    /// Σê²
    pub fn residual_sum_of_squares(&self) -> f64 {
        self.residuals.iter().map(|e| e * e).sum()
    }

    pub fn degrees_of_freedom(&self) -> usize {
        self.n.saturating_sub(2)
    }

    /// Standard error of the slope, √((Σê² / (n − 2)) / sxx).
    pub fn slope_standard_error(&self) -> f64 {
        (self.residual_sum_of_squares() / self.degrees_of_freedom() as f64 / self.sxx).sqrt()
    }

    pub fn is_perfect_fit(&self) -> bool {
        let n = self.n as f64;
        let rms_resid = (self.residual_sum_of_squares() / n).sqrt();
        let rms_y = (self.y_mean * self.y_mean + self.syy / n).sqrt();
        rms_resid <= PERFECT_FIT_RELATIVE_RMS * rms_y
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

struct Moments {
    x_mean: f64,
    y_mean: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn centered_moments(x: &[f64], y: &[f64]) -> Moments {
    let x_mean = mean(x);
    let y_mean = mean(y);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - x_mean;
        let dy = yi - y_mean;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    Moments {
        x_mean,
        y_mean,
        sxx,
        syy,
        sxy,
    }
}

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("x has {}, y has {}", x.len(), y.len())));
    }
    if x.len() < min_len {
        return Err(Error::SampleTooShort(format!(
            "{} observations, need at least {min_len}",
            x.len()
        )));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite regression input {v}")));
    }
    Ok(())
}

/// Least-squares line y = intercept + slope·x.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<RegressionFit> {
    check_pair(x, y, MIN_FIT_LEN)?;
    let m = centered_moments(x, y);
    if m.sxx == 0.0 {
        return Err(Error::DegenerateRegressor("x has zero variance".into()));
    }
    let slope = m.sxy / m.sxx;
    let intercept = m.y_mean - slope * m.x_mean;
    let residuals = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| yi - (intercept + slope * xi))
        .collect();
    Ok(RegressionFit {
        slope,
        intercept,
        x_mean: m.x_mean,
        y_mean: m.y_mean,
        residuals,
        sxx: m.sxx,
        syy: m.syy,
        n: x.len(),
    })
}

/// Least-squares slope of a line forced through the origin: Σxy / Σx².
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 1)?;
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("regressor is identically zero".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(sxy / sxx)
}

// Overshoot past ±1 tolerated as rounding and clamped.
const PEARSON_OVERSHOOT: f64 = 1e-12;

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y, 2)?;
    let m = centered_moments(x, y);
    if m.sxx == 0.0 || m.syy == 0.0 {
        return Err(Error::ZeroVariance(
            if m.sxx == 0.0 { "x is constant" } else { "y is constant" }.into(),
        ));
    }
    let r = m.sxy / (m.sxx * m.syy).sqrt();
    if r.abs() > 1.0 + PEARSON_OVERSHOOT {
        return Err(Error::Domain(format!("correlation {r} outside [-1, 1]")));
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Coefficient of determination, the square of [`pearson`].
pub fn r_squared(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson(x, y).map(|r| r * r)
}

/// Slope t-statistic, or a marker when the residuals vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TStatistic {
    Finite(f64),
    /// Residuals are zero to working precision; carries the slope sign.
    PerfectFit { positive: bool },
}

impl TStatistic {
    /// Numeric value, with the perfect-fit marker mapped to ±∞.
    pub fn value(self) -> f64 {
        match self {
            TStatistic::Finite(t) => t,
            TStatistic::PerfectFit { positive: true } => f64::INFINITY,
            TStatistic::PerfectFit { positive: false } => f64::NEG_INFINITY,
        }
    }

    pub fn is_perfect_fit(self) -> bool {
        matches!(self, TStatistic::PerfectFit { .. })
    }
}

impl Serialize for TStatistic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TStatistic::Finite(t) => s.serialize_f64(*t),
            TStatistic::PerfectFit { .. } => s.serialize_none(),
        }
    }
}

pub fn t_statistic(fit: &RegressionFit) -> Result<TStatistic> {
    if fit.n < MIN_FIT_LEN {
        return Err(Error::SampleTooShort(format!(
            "t-statistic needs n >= {MIN_FIT_LEN}, got {}",
            fit.n
        )));
    }
    if fit.slope == 0.0 {
        return Ok(TStatistic::Finite(0.0));
    }
    if fit.is_perfect_fit() {
        return Ok(TStatistic::PerfectFit {
            positive: fit.slope > 0.0,
        });
    }
    Ok(TStatistic::Finite(fit.slope / fit.slope_standard_error()))
}

/// P(T ≤ t) for Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: usize) -> Result<f64> {
    student_t_cdf_with(t, df, &BetaOptions::default())
}

pub fn student_t_cdf_with(t: f64, df: usize, opts: &BetaOptions) -> Result<f64> {
    let tail = two_sided_tail(t, df, opts)? / 2.0;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

// 2·P(T > |t|) = I_w(df/2, 1/2), w = df / (df + t²)
fn two_sided_tail(t: f64, df: usize, opts: &BetaOptions) -> Result<f64> {
    if df < 1 {
        return Err(Error::Domain(format!("degrees of freedom must be >= 1, got {df}")));
    }
    if t.is_nan() {
        return Err(Error::Domain("t-statistic is NaN".into()));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let nu = df as f64;
    let w = nu / (nu + t * t);
    regularized_incomplete_beta_with(w, nu / 2.0, 0.5, opts)
}

/// Two-sided p-value 2·P(T > |t|), floored at the smallest positive normal
/// double so that it stays in (0, 1]. Infinite `t` gives that floor.
pub fn p_value_two_sided(t: f64, df: usize) -> Result<f64> {
    p_value_two_sided_with(t, df, &BetaOptions::default())
}

pub fn p_value_two_sided_with(t: f64, df: usize, opts: &BetaOptions) -> Result<f64> {
    Ok(two_sided_tail(t, df, opts)?.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Everything the slope test reports, for one (x, y) pairing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceReport {
    pub fit: RegressionFit,
    pub pearson_r: f64,
    pub r_squared: f64,
    /// `null` in serialized form when the fit is perfect.
    pub t_statistic: TStatistic,
    pub p_value: f64,
    pub perfect_fit: bool,
    pub degrees_of_freedom: usize,
}

pub fn infer(x: &[f64], y: &[f64]) -> Result<InferenceReport> {
    let fit = ols_fit(x, y)?;
    let pearson_r = pearson(x, y)?;
    let t = t_statistic(&fit)?;
    let df = fit.degrees_of_freedom();
    let p_value = p_value_two_sided(t.value(), df)?;
    Ok(InferenceReport {
        pearson_r,
        r_squared: pearson_r * pearson_r,
        t_statistic: t,
        p_value,
        perfect_fit: t.is_perfect_fit(),
        degrees_of_freedom: df,
        fit,
    })
}
