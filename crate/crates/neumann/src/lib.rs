//! Command-line runner for the `neumann-core` library: JSON configurations,
//! CSV/JSON reports, parallel trials and Monte Carlo chunks, verification
//! suites and optional SVG plots.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
#[cfg(feature = "plot")]
pub mod plot;
pub mod suites;

pub use error::CliError;
