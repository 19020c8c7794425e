use std::path::PathBuf;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input data, bad configuration, unreadable files.
    Input,
    /// A numerical routine could not produce a valid answer.
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate period {0}")]
    DuplicatePeriod(String),

    #[error("non-finite value at period {0}")]
    NonFinite(String),

    #[error("period {period} does not match declared frequency {frequency}")]
    FrequencyMismatch { period: String, frequency: String },

    #[error("no observations")]
    NoObservations,

    #[error("already annual")]
    AlreadyAnnual,

    #[error("series {0} is not annual")]
    NotAnnual(String),

    #[error("sample too short: {0}")]
    SampleTooShort(String),

    #[error("non-positive value in {series} at {year}")]
    NonPositive { series: String, year: i32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("division by zero at period {0}")]
    ZeroDivision(String),

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("incomplete beta did not converge after {iterations} iterations (x={x}, a={a}, b={b})")]
    NonConvergence {
        iterations: usize,
        x: f64,
        a: f64,
        b: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("column '{column}' not found; available: {available}")]
    MissingColumn { column: String, available: String },

    #[error("{message} at {path}")]
    Config { path: String, message: String },

    #[error("no usable elasticity: {0}")]
    NoUsableElasticity(String),

    #[error("{}: {source}", path.display())]
    Source {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("year {year}: {source}")]
    AtYear {
        year: i32,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Source { source, .. }
            | Error::Stage { source, .. }
            | Error::AtYear { source, .. } => source.kind(),
            Error::Domain(_)
            | Error::ZeroDivision(_)
            | Error::DegenerateRegressor(_)
            | Error::ZeroVariance(_)
            | Error::NonConvergence { .. }
            | Error::NoUsableElasticity(_) => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn at_year(self, year: i32) -> Error {
        Error::AtYear {
            year,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
