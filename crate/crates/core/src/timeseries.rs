//! Time-series data model: validated series, annualization, the year-joined
//! model panel and the elementwise transforms used downstream.
//!
//! Periods are calendar years once a series is annual. Sub-annual periods are
//! `(year, index)` pairs, quarters numbered 1..=4 and months 1..=12.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Annual,
    Quarterly,
    Monthly,
}

impl Frequency {
    /// Sub-periods per calendar year.
    pub fn periods_per_year(self) -> u8 {
        match self {
            Frequency::Annual => 1,
            Frequency::Quarterly => 4,
            Frequency::Monthly => 12,
        }
    }

    /// Length of one period in months.
    pub fn months(self) -> u32 {
        12 / self.periods_per_year() as u32
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Frequency::Annual => "annual",
            Frequency::Quarterly => "quarterly",
            Frequency::Monthly => "monthly",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Period {
    Year(i32),
    Quarter(i32, u8),
    Month(i32, u8),
}

impl Period {
    pub fn year(self) -> i32 {
        match self {
            Period::Year(y) | Period::Quarter(y, _) | Period::Month(y, _) => y,
        }
    }

    pub fn frequency(self) -> Frequency {
        match self {
            Period::Year(_) => Frequency::Annual,
            Period::Quarter(..) => Frequency::Quarterly,
            Period::Month(..) => Frequency::Monthly,
        }
    }

    /// Builds the period of frequency `freq` containing the given calendar month.
    pub fn containing(freq: Frequency, year: i32, month: u32) -> Period {
        match freq {
            Frequency::Annual => Period::Year(year),
            Frequency::Quarterly => Period::Quarter(year, ((month - 1) / 3 + 1) as u8),
            Frequency::Monthly => Period::Month(year, month as u8),
        }
    }

    /// First calendar month of the period.
    pub fn start_month(self) -> u32 {
        match self {
            Period::Year(_) => 1,
            Period::Quarter(_, q) => 3 * q as u32 - 2,
            Period::Month(_, m) => m as u32,
        }
    }

    fn is_valid(self) -> bool {
        match self {
            Period::Year(_) => true,
            Period::Quarter(_, q) => (1..=4).contains(&q),
            Period::Month(_, m) => (1..=12).contains(&m),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Year(y) => write!(f, "{y}"),
            Period::Quarter(y, q) => write!(f, "{y}-Q{q}"),
            Period::Month(y, m) => write!(f, "{y}-{m:02}"),
        }
    }
}

/// A named, unit-tagged series of finite observations at one frequency,
/// strictly increasing in period.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    name: String,
    unit: String,
    frequency: Frequency,
    observations: Vec<(Period, f64)>,
}

impl Series {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn observations(&self) -> &[(Period, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.observations.iter().map(|&(_, v)| v)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Series {
        self.name = name.into();
        self
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Series {
        self.unit = unit.into();
        self
    }

    /// Keeps only observations whose calendar year lies in `first..=last`.
    pub fn clip_years(&self, first: i32, last: i32) -> Series {
        Series {
            observations: self
                .observations
                .iter()
                .copied()
                .filter(|(p, _)| (first..=last).contains(&p.year()))
                .collect(),
            ..self.clone()
        }
    }
}

/// Validates and sorts `points` into a [`Series`].
pub fn make_series(
    name: impl Into<String>,
    unit: impl Into<String>,
    frequency: Frequency,
    points: impl IntoIterator<Item = (Period, f64)>,
) -> Result<Series> {
    let mut observations: Vec<(Period, f64)> = points.into_iter().collect();
    if observations.is_empty() {
        return Err(Error::NoObservations);
    }
    for &(period, value) in &observations {
        if period.frequency() != frequency || !period.is_valid() {
            return Err(Error::FrequencyMismatch {
                period: period.to_string(),
                frequency: frequency.to_string(),
            });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(period.to_string()));
        }
    }
    observations.sort_by_key(|&(p, _)| p);
    if let Some(w) = observations.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicatePeriod(w[0].0.to_string()));
    }
    Ok(Series {
        name: name.into(),
        unit: unit.into(),
        frequency,
        observations,
    })
}

/// Convenience constructor for annual data keyed by calendar year.
pub fn annual_series(
    name: impl Into<String>,
    unit: impl Into<String>,
    points: impl IntoIterator<Item = (i32, f64)>,
) -> Result<Series> {
    make_series(
        name,
        unit,
        Frequency::Annual,
        points.into_iter().map(|(y, v)| (Period::Year(y), v)),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnualizeMethod {
    #[default]
    Mean,
    Last,
    Sum,
}

/// Collapses a quarterly or monthly series to calendar years. Years without
/// every sub-period present are dropped.
pub fn to_annual(s: &Series, method: AnnualizeMethod) -> Result<Series> {
    if s.frequency == Frequency::Annual {
        return Err(Error::AlreadyAnnual);
    }
    let per_year = s.frequency.periods_per_year() as usize;
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for &(p, v) in &s.observations {
        by_year.entry(p.year()).or_default().push(v);
    }
    let points: Vec<(Period, f64)> = by_year
        .into_iter()
        .filter(|(_, vs)| vs.len() == per_year)
        .map(|(year, vs)| {
            let value = match method {
                AnnualizeMethod::Mean => vs.iter().sum::<f64>() / per_year as f64,
                AnnualizeMethod::Last => vs[per_year - 1],
                AnnualizeMethod::Sum => vs.iter().sum(),
            };
            (Period::Year(year), value)
        })
        .collect();
    make_series(s.name.clone(), s.unit.clone(), Frequency::Annual, points)
}

/// Year-joined model variables over a common sample window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedPanel {
    pub(crate) years: Vec<i32>,
    pub(crate) y: Vec<f64>,
    pub(crate) k: Vec<f64>,
    pub(crate) l: Vec<f64>,
    pub(crate) a: Vec<f64>,
}

/// Minimum panel length: a simple regression needs n - 2 >= 1.
pub const MIN_PANEL_LEN: usize = 3;

impl AlignedPanel {
    /// Builds a panel from columns, enforcing the panel invariants.
    pub fn from_columns(
        years: Vec<i32>,
        y: Vec<f64>,
        k: Vec<f64>,
        l: Vec<f64>,
        a: Vec<f64>,
    ) -> Result<AlignedPanel> {
        let n = years.len();
        if [y.len(), k.len(), l.len(), a.len()].iter().any(|&m| m != n) {
            return Err(Error::LengthMismatch(format!(
                "years={n}, y={}, k={}, l={}, a={}",
                y.len(),
                k.len(),
                l.len(),
                a.len()
            )));
        }
        if n < MIN_PANEL_LEN {
            return Err(Error::SampleTooShort(format!(
                "{n} years, need at least {MIN_PANEL_LEN}"
            )));
        }
        if let Some(w) = years.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::DuplicatePeriod(w[1].to_string()));
        }
        for (label, col) in [("y", &y), ("k", &k), ("l", &l), ("a", &a)] {
            for (&year, &v) in years.iter().zip(col.iter()) {
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("{label} {year}")));
                }
                if v <= 0.0 {
                    return Err(Error::NonPositive {
                        series: label.to_string(),
                        year,
                    });
                }
            }
        }
        Ok(AlignedPanel { years, y, k, l, a })
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    /// Real GDP.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Capital stock.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Labor input.
    pub fn l(&self) -> &[f64] {
        &self.l
    }

    /// TFP index.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn first_year(&self) -> i32 {
        self.years[0]
    }

    pub fn last_year(&self) -> i32 {
        self.years[self.years.len() - 1]
    }

    /// Restricts the panel to years in `first..=last`.
    pub fn clip_years(&self, first: i32, last: i32) -> Result<AlignedPanel> {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| (first..=last).contains(&self.years[i]))
            .collect();
        let pick = |col: &[f64]| keep.iter().map(|&i| col[i]).collect::<Vec<_>>();
        AlignedPanel::from_columns(
            keep.iter().map(|&i| self.years[i]).collect(),
            pick(&self.y),
            pick(&self.k),
            pick(&self.l),
            pick(&self.a),
        )
    }

    /// The four columns as annual series named y, k, l, a.
    pub fn columns(&self) -> [Series; 4] {
        let col = |name: &str, values: &[f64]| Series {
            name: name.to_string(),
            unit: String::new(),
            frequency: Frequency::Annual,
            observations: self
                .years
                .iter()
                .zip(values)
                .map(|(&y, &v)| (Period::Year(y), v))
                .collect(),
        };
        [
            col("y", &self.y),
            col("k", &self.k),
            col("l", &self.l),
            col("a", &self.a),
        ]
    }
}

/// Inner-joins four annual series on calendar year.
///
/// Errors name the series by its model role (y, k, l or a), not by the
/// source series name.
pub fn align(y: &Series, k: &Series, l: &Series, a: &Series) -> Result<AlignedPanel> {
    let inputs = [("y", y), ("k", k), ("l", l), ("a", a)];
    for (_, s) in &inputs {
        if s.frequency != Frequency::Annual {
            return Err(Error::NotAnnual(s.name.clone()));
        }
    }
    let maps: Vec<BTreeMap<i32, f64>> = inputs
        .iter()
        .map(|(_, s)| s.observations.iter().map(|&(p, v)| (p.year(), v)).collect())
        .collect();
    let mut common: BTreeSet<i32> = maps[0].keys().copied().collect();
    for m in &maps[1..] {
        common.retain(|yr| m.contains_key(yr));
    }
    if common.len() < MIN_PANEL_LEN {
        return Err(Error::SampleTooShort(format!(
            "{} overlapping years, need at least {MIN_PANEL_LEN}",
            common.len()
        )));
    }
    let years: Vec<i32> = common.into_iter().collect();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(4);
    for ((label, _), m) in inputs.iter().zip(&maps) {
        let mut col = Vec::with_capacity(years.len());
        for &year in &years {
            let v = m[&year];
            if v <= 0.0 {
                return Err(Error::NonPositive {
                    series: label.to_string(),
                    year,
                });
            }
            col.push(v);
        }
        cols.push(col);
    }
    let a = cols.pop().unwrap();
    let l = cols.pop().unwrap();
    let k = cols.pop().unwrap();
    let y = cols.pop().unwrap();
    Ok(AlignedPanel { years, y, k, l, a })
}

/// Elementwise natural logarithm.
pub fn log_transform(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 {
                Ok(v.ln())
            } else {
                Err(Error::Domain(format!(
                    "log of non-positive value {v} at index {i}"
                )))
            }
        })
        .collect()
}

/// Percent change between consecutive observations, labelled with the later
/// period.
pub fn pct_change(s: &Series) -> Result<Series> {
    if s.len() < 2 {
        return Err(Error::SampleTooShort(format!(
            "pct_change needs 2 observations, got {}",
            s.len()
        )));
    }
    let mut out = Vec::with_capacity(s.len() - 1);
    for w in s.observations.windows(2) {
        let (p0, v0) = w[0];
        let (p1, v1) = w[1];
        if v0 == 0.0 {
            return Err(Error::ZeroDivision(p0.to_string()));
        }
        out.push((p1, 100.0 * (v1 - v0) / v0));
    }
    make_series(s.name.clone(), "percent", s.frequency, out)
}
