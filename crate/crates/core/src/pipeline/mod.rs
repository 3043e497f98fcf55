//! Caching, export, plot data and the command-line front end.

pub mod cache;
mod cli;
pub mod export;
pub mod histogram;
pub mod report;

pub use cache::Cache;
pub use cli::{run_cli, run_cli_with};
pub use export::{export_dataset, read_csv, read_jsonl, verify_rows, FeatureMode, Format, TripleRecord};
pub use histogram::{histogram, Histogram};
pub use report::{build_report, ReportOptions};
