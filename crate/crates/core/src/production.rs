//! Cobb-Douglas production with AGI-augmented labor,
//!
//! ```text
//! Y = A · K^α · (L · AGI)^(1-α)
//! ```
//!
//! and its inversions: the AGI technology level given (Y, A, K, L), the TFP
//! residual given (Y, K, L, AGI), effective labor, and capital-elasticity
//! estimates. Each inversion has a `Consistent` mode (the exact algebraic
//! inverse) and a `PaperLiteral` mode that evaluates the expression in its
//! originally published typeset form, kept for reproduction studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference;
use crate::timeseries::AlignedPanel;

/// Conventional capital share used when no α is configured.
pub const DEFAULT_ALPHA: f64 = 0.33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMode {
    #[default]
    Consistent,
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    alpha: f64,
    pub inversion_mode: FormulaMode,
    pub residual_mode: FormulaMode,
}

impl ModelParams {
    /// Consistent-mode parameters. α must lie strictly inside (0, 1).
    pub fn new(alpha: f64) -> Result<ModelParams> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
        }
        Ok(ModelParams {
            alpha,
            inversion_mode: FormulaMode::Consistent,
            residual_mode: FormulaMode::Consistent,
        })
    }

    pub fn with_modes(mut self, inversion: FormulaMode, residual: FormulaMode) -> ModelParams {
        self.inversion_mode = inversion;
        self.residual_mode = residual;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn require_positive(args: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in args {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

fn finite_positive(what: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} evaluated to {v}")))
    }
}

/// Y = a · k^α · (l · agi)^(1-α)
pub fn output(a: f64, k: f64, l: f64, agi: f64, params: &ModelParams) -> Result<f64> {
    require_positive(&[("a", a), ("k", k), ("l", l), ("agi", agi)])?;
    let alpha = params.alpha;
    finite_positive("output", a * k.powf(alpha) * (l * agi).powf(1.0 - alpha))
}

/// AGI technology level implied by observed output.
///
/// Consistent: `(y / (a·k^α·l^(1-α)))^(1/(1-α))`, the exact inverse of
/// [`output`]. PaperLiteral: `y / (a·k^α·l^(1-α))^(1/(1-α))`.
pub fn agi_index(y: f64, a: f64, k: f64, l: f64, params: &ModelParams) -> Result<f64> {
    require_positive(&[("y", y), ("a", a), ("k", k), ("l", l)])?;
    let alpha = params.alpha;
    let inv = 1.0 / (1.0 - alpha);
    let base = a * k.powf(alpha) * l.powf(1.0 - alpha);
    let v = match params.inversion_mode {
        FormulaMode::Consistent => (y / base).powf(inv),
        FormulaMode::PaperLiteral => y / base.powf(inv),
    };
    finite_positive("agi index", v)
}

/// TFP implied by output and inputs.
///
/// Consistent: the Solow residual `y / (k^α·(l·agi)^(1-α))`.
/// PaperLiteral: `k^α·l·agi^(1-α) / y`.
pub fn tfp_residual(y: f64, k: f64, l: f64, agi: f64, params: &ModelParams) -> Result<f64> {
    require_positive(&[("y", y), ("k", k), ("l", l), ("agi", agi)])?;
    let alpha = params.alpha;
    let v = match params.residual_mode {
        FormulaMode::Consistent => y / (k.powf(alpha) * (l * agi).powf(1.0 - alpha)),
        FormulaMode::PaperLiteral => k.powf(alpha) * l * agi.powf(1.0 - alpha) / y,
    };
    finite_positive("tfp residual", v)
}

/// `l·agi + (1 - agi)·l`, evaluated as written. Algebraically this is `l`
/// for every `agi`.
pub fn effective_labor(l: f64, agi: f64) -> Result<f64> {
    require_positive(&[("l", l)])?;
    if !agi.is_finite() {
        return Err(Error::Domain(format!("agi must be finite, got {agi}")));
    }
    Ok(l * agi + (1.0 - agi) * l)
}

/// Ratio of output to capital percent changes; `None` where capital did not
/// change.
pub fn elasticity_pointwise(y_pct: &[f64], k_pct: &[f64]) -> Result<Vec<Option<f64>>> {
    if y_pct.len() != k_pct.len() {
        return Err(Error::LengthMismatch(format!(
            "output changes {} vs capital changes {}",
            y_pct.len(),
            k_pct.len()
        )));
    }
    Ok(y_pct
        .iter()
        .zip(k_pct)
        .map(|(&dy, &dk)| (dk != 0.0).then(|| dy / dk))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElasticityEstimate {
    /// Year-over-year ratios labelled with the later year; only years where
    /// capital changed.
    pub pointwise: Vec<(i32, f64)>,
    pub regression_estimate: f64,
    pub method_note: String,
}

/// Estimates α from year-over-year growth in output and capital.
///
/// Only consecutive calendar years are differenced. The aggregate estimate
/// is the least-squares slope of Δln y on Δln k through the origin.
pub fn elasticity_regression(panel: &AlignedPanel) -> Result<ElasticityEstimate> {
    if panel.len() < 4 {
        return Err(Error::SampleTooShort(format!(
            "elasticity needs at least 4 years, got {}",
            panel.len()
        )));
    }
    let (years, y, k) = (panel.years(), panel.y(), panel.k());
    let mut dln_y = Vec::new();
    let mut dln_k = Vec::new();
    let mut y_pct = Vec::new();
    let mut k_pct = Vec::new();
    let mut pair_years = Vec::new();
    for i in 1..years.len() {
        if years[i] - years[i - 1] != 1 {
            continue;
        }
        dln_y.push(y[i].ln() - y[i - 1].ln());
        dln_k.push(k[i].ln() - k[i - 1].ln());
        y_pct.push(100.0 * (y[i] - y[i - 1]) / y[i - 1]);
        k_pct.push(100.0 * (k[i] - k[i - 1]) / k[i - 1]);
        pair_years.push(years[i]);
    }
    if dln_k.len() < 3 {
        return Err(Error::SampleTooShort(format!(
            "{} consecutive-year differences, need at least 3",
            dln_k.len()
        )));
    }
    let regression_estimate = inference::slope_through_origin(&dln_k, &dln_y).map_err(|_| {
        Error::ZeroVariance("capital log-differences are all zero".into())
    })?;
    let pointwise = pair_years
        .into_iter()
        .zip(elasticity_pointwise(&y_pct, &k_pct)?)
        .filter_map(|(yr, e)| e.map(|v| (yr, v)))
        .collect();
    Ok(ElasticityEstimate {
        pointwise,
        regression_estimate,
        method_note: format!(
            "least-squares slope of dln(Y) on dln(K) through the origin over {} consecutive-year pairs",
            dln_k.len()
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexResult {
    pub years: Vec<i32>,
    pub agi: Vec<f64>,
    pub tfp_residual: Vec<f64>,
    pub effective_labor: Vec<f64>,
    pub params: ModelParams,
    pub source_window: (i32, i32),
}

/// Applies the AGI inversion year by year, then recomputes TFP and effective
/// labor from the resulting index.
pub fn compute_index(panel: &AlignedPanel, params: &ModelParams) -> Result<IndexResult> {
    let n = panel.len();
    let mut agi = Vec::with_capacity(n);
    let mut tfp = Vec::with_capacity(n);
    let mut eff = Vec::with_capacity(n);
    for i in 0..n {
        let year = panel.years[i];
        let (y, k, l, a) = (panel.y[i], panel.k[i], panel.l[i], panel.a[i]);
        let g = agi_index(y, a, k, l, params).map_err(|e| e.at_year(year))?;
        tfp.push(tfp_residual(y, k, l, g, params).map_err(|e| e.at_year(year))?);
        eff.push(effective_labor(l, g).map_err(|e| e.at_year(year))?);
        agi.push(g);
    }
    Ok(IndexResult {
        years: panel.years.clone(),
        agi,
        tfp_residual: tfp,
        effective_labor: eff,
        params: *params,
        source_window: (panel.first_year(), panel.last_year()),
    })
}

/// Builds a panel whose output column is generated by [`output`] from the
/// given input paths.
pub fn synthesize_panel(
    years: &[i32],
    a_path: &[f64],
    k_path: &[f64],
    l_path: &[f64],
    agi_path: &[f64],
    params: &ModelParams,
) -> Result<AlignedPanel> {
    let n = years.len();
    if [a_path.len(), k_path.len(), l_path.len(), agi_path.len()]
        .iter()
        .any(|&m| m != n)
    {
        return Err(Error::LengthMismatch(format!(
            "years={n}, a={}, k={}, l={}, agi={}",
            a_path.len(),
            k_path.len(),
            l_path.len(),
            agi_path.len()
        )));
    }
    let y = (0..n)
        .map(|i| {
            output(a_path[i], k_path[i], l_path[i], agi_path[i], params)
                .map_err(|e| e.at_year(years[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    AlignedPanel::from_columns(
        years.to_vec(),
        y,
        k_path.to_vec(),
        l_path.to_vec(),
        a_path.to_vec(),
    )
}
