//! Synthetic panels generated from the production function, for demos,
//! self-checks and the bundled snapshot.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::error::{Error, Result};
use crate::ingest::to_fred_csv;
use crate::production::{synthesize_panel, ModelParams};
use crate::timeseries::{annual_series, make_series, AlignedPanel, Frequency, Period};

/// Growth rates are percent per year; `agi_noise_sd` is the standard
/// deviation of i.i.d. normal shocks added to ln AGI.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub first_year: i32,
    pub years: usize,
    pub alpha: f64,
    pub tfp_level: f64,
    pub tfp_growth_pct: f64,
    pub capital_level: f64,
    pub capital_growth_pct: f64,
    pub labor_level: f64,
    pub labor_growth_pct: f64,
    pub agi_growth_pct: f64,
    pub agi_noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            first_year: 1990,
            years: 30,
            alpha: 0.33,
            tfp_level: 1.0,
            tfp_growth_pct: 0.8,
            capital_level: 30_000.0,
            capital_growth_pct: 2.5,
            labor_level: 150.0,
            labor_growth_pct: 0.9,
            agi_growth_pct: 3.0,
            agi_noise_sd: 0.02,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPanel {
    pub panel: AlignedPanel,
    /// The AGI path used to generate output.
    pub agi: Vec<f64>,
    pub params: ModelParams,
}

pub fn synthesize(opts: &SynthOptions) -> Result<SynthPanel> {
    let params = ModelParams::new(opts.alpha)?;
    if !(opts.agi_noise_sd >= 0.0 && opts.agi_noise_sd.is_finite()) {
        return Err(Error::Domain(format!("noise sd {} must be >= 0", opts.agi_noise_sd)));
    }
    let noise = Normal::new(0.0, opts.agi_noise_sd)
        .map_err(|e| Error::Domain(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.years;
    let path = |level: f64, pct: f64| -> Vec<f64> {
        (0..n).map(|i| level * (1.0 + pct / 100.0).powi(i as i32)).collect()
    };
    let a = path(opts.tfp_level, opts.tfp_growth_pct);
    let k = path(opts.capital_level, opts.capital_growth_pct);
    let l = path(opts.labor_level, opts.labor_growth_pct);
    let agi: Vec<f64> = path(1.0, opts.agi_growth_pct)
        .into_iter()
        .map(|g| g * noise.sample(&mut rng).exp())
        .collect();
    let years: Vec<i32> = (0..n as i32).map(|i| opts.first_year + i).collect();
    let panel = synthesize_panel(&years, &a, &k, &l, &agi, &params)?;
    Ok(SynthPanel { panel, agi, params })
}

// Within-year pattern for quarterly GDP; averages to exactly 1.
const QUARTER_SHAPE: [f64; 4] = [0.985, 0.995, 1.005, 1.015];

/// Writes the panel as four fred_csv files plus a `config.json` that runs
/// them, returning the file names written.
///
/// With `quarterly_gdp`, GDP is written as quarters whose annual mean is the
/// synthetic annual value.
pub fn write_synthetic_sources(
    dir: &Path,
    synth: &SynthPanel,
    quarterly_gdp: bool,
) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let p = &synth.panel;
    let years = p.years();
    let annual = |name: &str, col: &[f64]| {
        annual_series(name, "", years.iter().copied().zip(col.iter().copied()))
    };
    let gdp = if quarterly_gdp {
        make_series(
            "SYNTH_GDP",
            "",
            Frequency::Quarterly,
            years.iter().zip(p.y()).flat_map(|(&yr, &v)| {
                QUARTER_SHAPE
                    .iter()
                    .enumerate()
                    .map(move |(q, s)| (Period::Quarter(yr, q as u8 + 1), v * s))
            }),
        )?
    } else {
        annual("SYNTH_GDP", p.y())?
    };
    let files = [
        ("gdp.csv", gdp, "gdp"),
        ("capital.csv", annual("SYNTH_CAPITAL", p.k())?, "capital"),
        ("labor.csv", annual("SYNTH_LABOR", p.l())?, "labor"),
        ("tfp.csv", annual("SYNTH_TFP", p.a())?, "tfp"),
    ];
    let mut sources = Vec::new();
    let mut written = Vec::new();
    for (file, series, var) in &files {
        std::fs::write(dir.join(file), to_fred_csv(series))?;
        sources.push(json!({
            "path": file,
            "format": "fred_csv",
            "variable": var,
            "frequency": series.frequency(),
        }));
        written.push(file.to_string());
    }
    let config = json!({
        "sources": sources,
        "alpha": synth.params.alpha(),
        "regression_orientation": "both",
    });
    let mut text = serde_json::to_string_pretty(&config)?;
    text.push('\n');
    std::fs::write(dir.join("config.json"), text)?;
    written.push("config.json".into());
    Ok(written)
}
