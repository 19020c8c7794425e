//! AGI technology-level index from macroeconomic series.
//!
//! The index comes from inverting a Cobb-Douglas production function with
//! AGI-augmented labor, `Y = A·K^α·(L·AGI)^(1-α)`, year by year. The log of
//! the index is then regressed against log real GDP with a self-contained
//! least-squares and Student-t inference engine.
//!
//! - [`timeseries`]: series model, annualization, panel alignment
//! - [`production`]: production function, AGI inversion, TFP residual, α estimates
//! - [`inference`]: OLS, Pearson r, R², slope t-test, incomplete beta
//! - [`ingest`]: FRED / generic CSV parsing, JSON run configuration
//! - [`pipeline`]: end-to-end runs, projections, self-checks, synthetic data

pub mod error;
pub mod inference;
pub mod ingest;
pub mod pipeline;
pub mod production;
pub mod timeseries;

pub use error::{Error, ErrorKind, Result};
