//! File ingestion: FRED-style and generic CSV series, the JSON run
//! configuration, and assembly of the aligned model panel.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::production::{FormulaMode, DEFAULT_ALPHA};
use crate::timeseries::{
    align, make_series, to_annual, AlignedPanel, AnnualizeMethod, Frequency, Period, Series,
};

const UTF8_BOM: &str = "\u{feff}";

fn decode(bytes: &[u8]) -> Result<&str> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "invalid UTF-8".into(),
    })?;
    Ok(text.strip_prefix(UTF8_BOM).unwrap_or(text))
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| Error::Parse {
        line,
        message: format!("unparseable date '{s}', expected YYYY-MM-DD"),
    })
}

fn month_index(d: NaiveDate) -> i64 {
    d.year() as i64 * 12 + d.month0() as i64
}

/// Infers the sampling frequency from `(line, date)` pairs in file order.
///
/// The smallest gap between consecutive dates sets the step, which must be
/// one, three or twelve months; every other gap must be a whole multiple of
/// it.
fn infer_frequency(dates: &[(usize, NaiveDate)]) -> Result<Frequency> {
    match dates {
        [] => Err(Error::NoObservations),
        [(line, d)] => {
            if d.month() == 1 {
                Ok(Frequency::Annual)
            } else {
                Err(Error::Parse {
                    line: *line,
                    message: "cannot infer frequency from a single non-January date".into(),
                })
            }
        }
        _ => {
            let mut gaps = Vec::with_capacity(dates.len() - 1);
            for w in dates.windows(2) {
                let gap = month_index(w[1].1) - month_index(w[0].1);
                if gap <= 0 {
                    return Err(Error::Parse {
                        line: w[1].0,
                        message: format!(
                            "date {} does not advance by at least one month over {}",
                            w[1].1, w[0].1
                        ),
                    });
                }
                gaps.push((w[1].0, gap));
            }
            let step = gaps.iter().map(|&(_, g)| g).min().unwrap_or(12);
            let freq = match step {
                1 => Frequency::Monthly,
                3 => Frequency::Quarterly,
                12 => Frequency::Annual,
                other => {
                    return Err(Error::Parse {
                        line: gaps.iter().find(|g| g.1 == other).map_or(2, |g| g.0),
                        message: format!("unsupported spacing of {other} months"),
                    })
                }
            };
            if let Some(&(line, gap)) = gaps.iter().find(|&&(_, g)| g % step != 0) {
                return Err(Error::Parse {
                    line,
                    message: format!("inconsistent spacing: {gap}-month gap in a {freq} series"),
                });
            }
            Ok(freq)
        }
    }
}

/// Parses a value field; `Ok(None)` for the missing marker "." or an empty
/// field.
fn parse_value(s: &str, line: usize) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() || s == "." {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| Error::Parse {
        line,
        message: format!("unparseable value '{s}'"),
    })
}

fn build_dated_series(
    name: &str,
    dated: &[(usize, NaiveDate)],
    values: Vec<(NaiveDate, f64)>,
) -> Result<Series> {
    let freq = infer_frequency(dated)?;
    make_series(
        name,
        "",
        freq,
        values
            .into_iter()
            .map(|(d, v)| (Period::containing(freq, d.year(), d.month()), v)),
    )
}

/// Parses FRED's two-column download format:
///
/// ```text
/// DATE,GDPC1
/// 1947-01-01,2182.681
/// 1947-04-01,.
/// ```
///
/// Rows holding "." are skipped. The series is named after the header's
/// second field and its frequency comes from the date spacing (including the
/// dates of skipped rows).
pub fn parse_fred_csv(bytes: &[u8]) -> Result<Series> {
    let text = decode(bytes)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let name = match header.split(',').collect::<Vec<_>>().as_slice() {
        [date, id] if is_date_header(date) && !id.trim().is_empty() => id.trim().to_string(),
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("malformed header '{header}', expected DATE,<SERIES_ID>"),
            })
        }
    };
    let mut dated = Vec::new();
    let mut values = Vec::new();
    for (line, row) in lines {
        if row.trim().is_empty() {
            continue;
        }
        let (date, value) = row.split_once(',').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected 2 fields, got '{row}'"),
        })?;
        if value.contains(',') {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, got '{row}'"),
            });
        }
        let date = parse_date(date.trim(), line)?;
        dated.push((line, date));
        if let Some(v) = parse_value(value, line)? {
            values.push((date, v));
        }
    }
    if values.is_empty() {
        return Err(Error::NoObservations);
    }
    build_dated_series(&name, &dated, values)
}

fn is_date_header(field: &str) -> bool {
    let f = field.trim();
    f == "DATE" || f.eq_ignore_ascii_case("observation_date")
}

/// Renders a series in the format read by [`parse_fred_csv`]. Periods are
/// stamped with their first day; interior gaps are written as "." rows so
/// the spacing, and therefore the frequency, survives a re-parse.
pub fn to_fred_csv(s: &Series) -> String {
    let mut out = format!("DATE,{}\n", s.name());
    let step = s.frequency().months() as i64;
    let month_of = |p: Period| p.year() as i64 * 12 + p.start_month() as i64 - 1;
    let mut next: Option<i64> = None;
    for &(p, v) in s.observations() {
        let m = month_of(p);
        if let Some(mut gap) = next {
            while gap < m {
                let _ = writeln!(out, "{:04}-{:02}-01,.", gap.div_euclid(12), gap.rem_euclid(12) + 1);
                gap += step;
            }
        }
        let _ = writeln!(out, "{:04}-{:02}-01,{}", p.year(), p.start_month(), v);
        next = Some(m + step);
    }
    out
}

/// Reads one dated column and one value column from a headed CSV file.
///
/// Dates are either bare years (annual) or YYYY-MM-DD, in which case the
/// frequency is inferred from spacing as for FRED files. Empty and "." values
/// are skipped.
pub fn parse_generic_csv(bytes: &[u8], date_column: &str, value_column: &str) -> Result<Series> {
    let text = decode(bytes)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let find = |col: &str| {
        headers.iter().position(|h| h == col).ok_or_else(|| Error::MissingColumn {
            column: col.to_string(),
            available: headers.iter().collect::<Vec<_>>().join(", "),
        })
    };
    let date_idx = find(date_column)?;
    let value_idx = find(value_column)?;

    let mut years: Vec<(usize, i32)> = Vec::new();
    let mut dated: Vec<(usize, NaiveDate)> = Vec::new();
    let mut year_values = Vec::new();
    let mut date_values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| {
            rec.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing field {}", i + 1),
            })
        };
        let date = field(date_idx)?;
        let value = parse_value(field(value_idx)?, line)?;
        if is_bare_year(date) {
            let y: i32 = date.parse().map_err(|_| Error::Parse {
                line,
                message: format!("unparseable year '{date}'"),
            })?;
            years.push((line, y));
            if let Some(v) = value {
                year_values.push((Period::Year(y), v));
            }
        } else {
            let d = parse_date(date, line)?;
            dated.push((line, d));
            if let Some(v) = value {
                date_values.push((d, v));
            }
        }
        if !years.is_empty() && !dated.is_empty() {
            return Err(Error::Parse {
                line,
                message: "mixes bare years and full dates".into(),
            });
        }
    }
    if !years.is_empty() {
        if year_values.is_empty() {
            return Err(Error::NoObservations);
        }
        return make_series(value_column, "", Frequency::Annual, year_values);
    }
    if date_values.is_empty() {
        return Err(Error::NoObservations);
    }
    build_dated_series(value_column, &dated, date_values)
}

fn is_bare_year(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.len() <= 4 && digits.bytes().all(|b| b.is_ascii_digit())
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    FredCsv,
    GenericCsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Gdp,
    Capital,
    Labor,
    Tfp,
}

impl Variable {
    pub const ALL: [Variable; 4] = [Variable::Gdp, Variable::Capital, Variable::Labor, Variable::Tfp];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::Gdp => "gdp",
            Variable::Capital => "capital",
            Variable::Labor => "labor",
            Variable::Tfp => "tfp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSpec {
    pub path: PathBuf,
    pub format: SourceFormat,
    pub variable: Variable,
    pub frequency: Frequency,
    pub annualize: AnnualizeMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date_column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_column: Option<String>,
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSetting {
    /// No α configured; the conventional capital share is used.
    Default,
    Fixed(f64),
    /// Estimate α from the panel.
    Estimate,
}

impl Serialize for AlphaSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaSetting::Default => s.serialize_f64(DEFAULT_ALPHA),
            AlphaSetting::Fixed(v) => s.serialize_f64(*v),
            AlphaSetting::Estimate => s.serialize_str("estimate"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// ln GDP regressed on ln AGI.
    #[default]
    GdpOnAgi,
    /// ln AGI regressed on ln GDP.
    AgiOnGdp,
    Both,
}

impl Orientation {
    pub fn runs(self) -> &'static [Orientation] {
        match self {
            Orientation::GdpOnAgi => &[Orientation::GdpOnAgi],
            Orientation::AgiOnGdp => &[Orientation::AgiOnGdp],
            Orientation::Both => &[Orientation::GdpOnAgi, Orientation::AgiOnGdp],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OutputSpec {
    pub format: ReportFormat,
    /// Standard output when absent.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub sources: Vec<SourceSpec>,
    pub alpha: AlphaSetting,
    pub inversion_mode: FormulaMode,
    pub residual_mode: FormulaMode,
    pub regression_orientation: Orientation,
    pub sample_window: Option<(i32, i32)>,
    pub output: OutputSpec,
    /// Directory relative source paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn source(&self, v: Variable) -> &SourceSpec {
        self.sources
            .iter()
            .find(|s| s.variable == v)
            .expect("validated config has every variable")
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path.to_path_buf(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    sources: Vec<RawSource>,
    #[serde(default)]
    alpha: Option<serde_json::Value>,
    #[serde(default)]
    inversion_mode: Option<FormulaMode>,
    #[serde(default)]
    residual_mode: Option<FormulaMode>,
    #[serde(default)]
    regression_orientation: Option<Orientation>,
    #[serde(default)]
    sample_window: Option<(i32, i32)>,
    #[serde(default)]
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    path: PathBuf,
    format: SourceFormat,
    variable: Variable,
    frequency: Frequency,
    #[serde(default)]
    annualize: Option<AnnualizeMethod>,
    #[serde(default)]
    date_column: Option<String>,
    #[serde(default)]
    value_column: Option<String>,
    #[serde(default)]
    unit: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    format: Option<ReportFormat>,
    #[serde(default)]
    path: Option<PathBuf>,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates a JSON run configuration, applying defaults.
pub fn load_config(bytes: &[u8]) -> Result<PipelineConfig> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "$".to_string() } else { format!("$.{path}") };
        config_err(path, e.into_inner().to_string())
    })?;

    if raw.sources.len() != 4 {
        return Err(config_err(
            "$.sources",
            format!("expected exactly 4 sources, got {}", raw.sources.len()),
        ));
    }
    let mut seen: BTreeMap<Variable, usize> = BTreeMap::new();
    let mut sources = Vec::with_capacity(4);
    for (i, s) in raw.sources.into_iter().enumerate() {
        let at = |field: &str| format!("$.sources[{i}].{field}");
        if seen.insert(s.variable, i).is_some() {
            return Err(config_err(
                at("variable"),
                format!("duplicate variable {}", s.variable.as_str()),
            ));
        }
        match s.format {
            SourceFormat::GenericCsv => {
                for (field, v) in [("date_column", &s.date_column), ("value_column", &s.value_column)] {
                    if v.as_deref().is_none_or(str::is_empty) {
                        return Err(config_err(at(field), format!("generic_csv requires {field}")));
                    }
                }
            }
            SourceFormat::FredCsv => {
                for (field, v) in [("date_column", &s.date_column), ("value_column", &s.value_column)] {
                    if v.is_some() {
                        return Err(config_err(at(field), format!("fred_csv does not take {field}")));
                    }
                }
            }
        }
        sources.push(SourceSpec {
            path: s.path,
            format: s.format,
            variable: s.variable,
            frequency: s.frequency,
            annualize: s.annualize.unwrap_or_default(),
            date_column: s.date_column,
            value_column: s.value_column,
            unit: s.unit.unwrap_or_default(),
        });
    }

    let alpha = match raw.alpha {
        None | Some(serde_json::Value::Null) => AlphaSetting::Default,
        Some(serde_json::Value::String(s)) if s == "estimate" => AlphaSetting::Estimate,
        Some(serde_json::Value::Number(n)) => {
            let v = n.as_f64().unwrap_or(f64::NAN);
            if !(v > 0.0 && v < 1.0) {
                return Err(config_err("$.alpha", "alpha out of (0,1)"));
            }
            AlphaSetting::Fixed(v)
        }
        Some(_) => {
            return Err(config_err("$.alpha", "expected a number in (0,1) or \"estimate\""));
        }
    };

    if let Some((first, last)) = raw.sample_window {
        if first > last {
            return Err(config_err(
                "$.sample_window",
                format!("window start {first} is after end {last}"),
            ));
        }
    }

    let output = raw
        .output
        .map(|o| OutputSpec {
            format: o.format.unwrap_or_default(),
            path: o.path,
        })
        .unwrap_or_default();

    Ok(PipelineConfig {
        sources,
        alpha,
        inversion_mode: raw.inversion_mode.unwrap_or_default(),
        residual_mode: raw.residual_mode.unwrap_or_default(),
        regression_orientation: raw.regression_orientation.unwrap_or_default(),
        sample_window: raw.sample_window,
        output,
        base_dir: None,
    })
}

/// Reads a configuration file; relative source paths resolve against its
/// directory.
pub fn load_config_file(path: &Path) -> Result<PipelineConfig> {
    let bytes = std::fs::read(path).map_err(|e| Error::Source {
        path: path.to_path_buf(),
        source: Box::new(e.into()),
    })?;
    let mut cfg = load_config(&bytes).map_err(|e| Error::Source {
        path: path.to_path_buf(),
        source: Box::new(e),
    })?;
    cfg.base_dir = Some(path.parent().map(Path::to_path_buf).unwrap_or_default());
    Ok(cfg)
}

/// Parses one source to an annual, window-clipped series.
pub fn load_source(spec: &SourceSpec, config: &PipelineConfig) -> Result<Series> {
    let path = config.resolve(&spec.path);
    let wrap = |e: Error| Error::Source {
        path: spec.path.clone(),
        source: Box::new(e),
    };
    let bytes = std::fs::read(&path).map_err(|e| wrap(e.into()))?;
    let series = match spec.format {
        SourceFormat::FredCsv => parse_fred_csv(&bytes),
        SourceFormat::GenericCsv => parse_generic_csv(
            &bytes,
            spec.date_column.as_deref().unwrap_or_default(),
            spec.value_column.as_deref().unwrap_or_default(),
        ),
    }
    .map_err(wrap)?;
    if series.frequency() != spec.frequency {
        return Err(wrap(Error::FrequencyMismatch {
            period: format!("file ({})", series.frequency()),
            frequency: spec.frequency.to_string(),
        }));
    }
    let series = if series.frequency() == Frequency::Annual {
        series
    } else {
        to_annual(&series, spec.annualize).map_err(wrap)?
    };
    let series = series.with_unit(spec.unit.clone());
    Ok(match config.sample_window {
        Some((first, last)) => series.clip_years(first, last),
        None => series,
    })
}

/// Loads all four sources and joins them into the model panel.
pub fn assemble(config: &PipelineConfig) -> Result<AlignedPanel> {
    let [y, k, l, a] = Variable::ALL.map(|v| load_source(config.source(v), config));
    align(&y?, &k?, &l?, &a?)
}
