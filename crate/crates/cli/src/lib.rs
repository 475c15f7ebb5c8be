//! Command-line pipeline around the `tailscope` analysis crate.

pub mod error;
pub mod json;
pub mod report;
pub mod svg;

pub use error::CliError;
pub use report::{analyze, run_pipeline, AnalysisReport, QuantityKind, Settings};
