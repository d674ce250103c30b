//! Pipelines behind the `bayes-evt` command-line tool.

pub mod cache;
pub mod commands;
pub mod error;
pub mod flags;
pub mod report;

pub use cache::GridCache;
pub use error::{CliError, CliResult};
pub use report::{build_report, AnalysisReport, FitConfig};
