//! Traffic-matrix analytics for heavy-tailed network quantities.
//!
//! The pipeline runs `ingest` → [`TrafficMatrix`] → [`quantities`] →
//! [`binning`] → [`distfit`]. [`synth`] produces seeded record streams in the
//! same CSV schema that `ingest` reads.

pub mod binning;
pub mod distfit;
pub mod error;
pub mod ingest;
pub mod matrix;
pub mod quantities;
pub mod synth;

pub use binning::{ccdf, ccdf_real, log_bin, EmpiricalCcdf, LogBin, LogBinnedHistogram};
pub use error::{Error, Result};
pub use ingest::{
    parse_csv, window, ColumnRef, ParseOutcome, SchemaConfig, TrafficRecord, WindowSpec,
};
pub use matrix::{CountVector, Entry, TrafficMatrix};
pub use quantities::{brightness_rank, QuantityReport, Scalars};
