//! Bayesian extreme-value analysis of annual block maxima.
//!
//! The model is the two-parameter Fréchet-form GEV with location tied to
//! `β/ξ`. A flat-prior posterior over `(ξ, β)` is evaluated on a grid and fed
//! to return-level distributions; stationarity tests check whether a series
//! can be treated as one sample.

pub mod error;
pub mod gev;
pub mod ingest;
pub mod posterior;
pub mod return_levels;
pub mod special;
pub mod stationarity;
pub mod stats;

pub use error::{Error, Result};
pub use gev::{
    gev_cdf, gev_log_pdf, horizon_exceedance_probability, horizon_level, joint_log_likelihood, return_level,
    sample_gev, GevParams, Probability, ReturnLevel,
};
pub use ingest::{
    block_maxima, merge_series, parse_daily_csv, write_daily_csv, Block, BlockExtraction, BlockMaxima, DailySeries,
    ParseConfig, Units,
};
pub use posterior::{evaluate, evaluate_serial, Axis, GridSpec, MarginalDensity, PosteriorGrid};
pub use return_levels::{
    exceedance_probability, grid_expectation, interval_membership, return_levels, sample_posterior, LevelSummary,
    ParamSamples, ReturnLevelSamples,
};
pub use stationarity::{ks_split_scan, ks_two_sample, mann_kendall, welch_t_test, SplitScanResult, TestResult};
