//! End-to-end orchestration: assemble the panel, resolve α, compute the AGI
//! index, regress log GDP against log AGI, and package a report.

mod selfcheck;
mod synth;

pub use selfcheck::{selfcheck, selfcheck_with, SelfCheckOptions, SelfCheckSummary, SuiteResult};
pub use synth::{synthesize, write_synthetic_sources, SynthOptions, SynthPanel};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{infer, InferenceReport};
use crate::ingest::{assemble, AlphaSetting, Orientation, PipelineConfig};
use crate::production::{
    compute_index, elasticity_regression, ElasticityEstimate, FormulaMode, IndexResult,
    ModelParams, DEFAULT_ALPHA,
};
use crate::timeseries::{log_transform, AlignedPanel};

pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// The modelling choices of a run, separate from where the data came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelChoices {
    pub alpha: AlphaSetting,
    pub inversion_mode: FormulaMode,
    pub residual_mode: FormulaMode,
    pub orientation: Orientation,
}

impl Default for ModelChoices {
    fn default() -> Self {
        ModelChoices {
            alpha: AlphaSetting::Default,
            inversion_mode: FormulaMode::Consistent,
            residual_mode: FormulaMode::Consistent,
            orientation: Orientation::GdpOnAgi,
        }
    }
}

impl From<&PipelineConfig> for ModelChoices {
    fn from(c: &PipelineConfig) -> Self {
        ModelChoices {
            alpha: c.alpha,
            inversion_mode: c.inversion_mode,
            residual_mode: c.residual_mode,
            orientation: c.regression_orientation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSummary {
    pub n: usize,
    pub first_year: i32,
    pub last_year: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaUsed {
    pub value: f64,
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<ElasticityEstimate>,
}

/// Natural-log columns fed to the regression, one row per panel year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogSeries {
    pub years: Vec<i32>,
    pub ln_gdp: Vec<f64>,
    pub ln_agi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrientedRegression {
    pub orientation: Orientation,
    pub dependent: &'static str,
    pub independent: &'static str,
    #[serde(flatten)]
    pub report: InferenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub panel_summary: PanelSummary,
    pub alpha_used: AlphaUsed,
    pub index: IndexResult,
    pub log_series: LogSeries,
    pub regression: Vec<OrientedRegression>,
    pub interpretation: Vec<String>,
}

impl Analysis {
    pub fn regression_for(&self, o: Orientation) -> Option<&OrientedRegression> {
        self.regression.iter().find(|r| r.orientation == o)
    }
}

/// Serialized field order is fixed: config echo, panel summary, α, index,
/// log columns, regressions, interpretation, engine version.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config_echo: PipelineConfig,
    #[serde(flatten)]
    pub analysis: Analysis,
    pub engine_version: &'static str,
}

fn resolve_alpha(panel: &AlignedPanel, setting: AlphaSetting) -> Result<AlphaUsed> {
    match setting {
        AlphaSetting::Default => Ok(AlphaUsed {
            value: DEFAULT_ALPHA,
            provenance: "default: conventional capital share, user-overridable".into(),
            estimate: None,
        }),
        AlphaSetting::Fixed(value) => Ok(AlphaUsed {
            value,
            provenance: "configured".into(),
            estimate: None,
        }),
        AlphaSetting::Estimate => {
            let est = elasticity_regression(panel)?;
            let value = est.regression_estimate;
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::Domain(format!("estimated alpha {value} outside (0, 1)")));
            }
            Ok(AlphaUsed {
                value,
                provenance: format!("estimated: {}", est.method_note),
                estimate: Some(est),
            })
        }
    }
}

fn describe(o: Orientation, slope: f64) -> [String; 2] {
    let (indep, dep) = match o {
        Orientation::GdpOnAgi | Orientation::Both => ("AGI", "real GDP"),
        Orientation::AgiOnGdp => ("real GDP", "AGI"),
    };
    let tag = match o {
        Orientation::AgiOnGdp => "agi_on_gdp",
        _ => "gdp_on_agi",
    };
    let direct = format!(
        "{tag}: a 1% increase in {indep} is associated with a {slope:.6}% change in {dep}"
    );
    let reciprocal = if slope == 0.0 {
        format!("{tag} (reciprocal): undefined, the fitted slope is zero")
    } else {
        format!(
            "{tag} (reciprocal): a 1% change in {dep} corresponds to a {:.6}% change in {indep}",
            1.0 / slope
        )
    };
    [direct, reciprocal]
}

/// Everything after panel assembly.
pub fn analyze(panel: &AlignedPanel, choices: &ModelChoices) -> Result<Analysis> {
    let alpha_used = resolve_alpha(panel, choices.alpha).map_err(|e| e.in_stage("alpha"))?;
    let params = ModelParams::new(alpha_used.value)
        .map_err(|e| e.in_stage("alpha"))?
        .with_modes(choices.inversion_mode, choices.residual_mode);
    let index = compute_index(panel, &params).map_err(|e| e.in_stage("index"))?;

    let ln_gdp = log_transform(panel.y()).map_err(|e| e.in_stage("log"))?;
    let ln_agi = log_transform(&index.agi).map_err(|e| e.in_stage("log"))?;

    let mut regression = Vec::new();
    let mut interpretation = Vec::new();
    for &o in choices.orientation.runs() {
        let (x, y, dependent, independent) = match o {
            Orientation::AgiOnGdp => (&ln_gdp, &ln_agi, "ln_agi", "ln_gdp"),
            _ => (&ln_agi, &ln_gdp, "ln_gdp", "ln_agi"),
        };
        let report = infer(x, y).map_err(|e| e.in_stage("regression"))?;
        interpretation.extend(describe(o, report.fit.slope));
        regression.push(OrientedRegression {
            orientation: o,
            dependent,
            independent,
            report,
        });
    }

    Ok(Analysis {
        panel_summary: PanelSummary {
            n: panel.len(),
            first_year: panel.first_year(),
            last_year: panel.last_year(),
        },
        alpha_used,
        index,
        log_series: LogSeries {
            years: panel.years().to_vec(),
            ln_gdp,
            ln_agi,
        },
        regression,
        interpretation,
    })
}

/// Runs the full pipeline described by `config`.
pub fn run(config: &PipelineConfig) -> Result<RunReport> {
    let panel = assemble(config).map_err(|e| e.in_stage("assemble"))?;
    let analysis = analyze(&panel, &ModelChoices::from(config))?;
    Ok(RunReport {
        config_echo: config.clone(),
        analysis,
        engine_version: ENGINE_VERSION,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionRow {
    pub year: i32,
    pub agi_growth_pct: f64,
    pub gdp_growth_pct: f64,
}

/// Projects GDP growth from an assumed AGI growth rate using the fitted
/// log-log slope as an elasticity. An in-sample extrapolation, not a
/// forecast.
pub fn project(report: &Analysis, agi_growth_pct: f64, years: u32) -> Result<Vec<ProjectionRow>> {
    let reg = report.regression_for(Orientation::GdpOnAgi).ok_or_else(|| {
        Error::NoUsableElasticity("report has no gdp_on_agi regression".into())
    })?;
    if reg.report.perfect_fit {
        return Err(Error::NoUsableElasticity(
            "the gdp_on_agi fit is perfect, so it carries no sampling information".into(),
        ));
    }
    project_with_slope(reg.report.fit.slope, report.panel_summary.last_year, agi_growth_pct, years)
}

/// Rows for `years` calendar years after `last_year` at a constant
/// elasticity `slope`.
pub fn project_with_slope(
    slope: f64,
    last_year: i32,
    agi_growth_pct: f64,
    years: u32,
) -> Result<Vec<ProjectionRow>> {
    if !slope.is_finite() {
        return Err(Error::NoUsableElasticity(format!("slope {slope} is not finite")));
    }
    if !agi_growth_pct.is_finite() {
        return Err(Error::Domain(format!("AGI growth {agi_growth_pct} is not finite")));
    }
    Ok((1..=years as i32)
        .map(|i| ProjectionRow {
            year: last_year + i,
            agi_growth_pct,
            gdp_growth_pct: slope * agi_growth_pct,
        })
        .collect())
}

/// Flattens any serializable report into `key,value` rows, keys joined with
/// dots and array positions as indices.
pub fn to_flat_csv<T: Serialize>(value: &T) -> Result<String> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_string()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            serde_json::Value::Object(m) => {
                for (k, v) in m {
                    walk(&key(k), v, out);
                }
            }
            serde_json::Value::Array(a) => {
                for (i, v) in a.iter().enumerate() {
                    walk(&key(&i.to_string()), v, out);
                }
            }
            serde_json::Value::Null => out.push((prefix.to_string(), String::new())),
            serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let value = serde_json::to_value(value)?;
    let mut rows = Vec::new();
    walk("", &value, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
