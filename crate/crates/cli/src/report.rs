//! JSON report types. Every number is derived from a [`GridCache`] plus the
//! sampling configuration.

use bayes_evt::ingest::DroppedBlock;
use bayes_evt::{
    grid_expectation, horizon_level, return_level, return_levels, sample_posterior, Axis, GevParams, GridSpec,
    LevelSummary, MarginalDensity, ParamSamples, PosteriorGrid, Probability, Units,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cache::{GridCache, SCHEMA_VERSION};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub units: Units,
    pub coverage: f64,
    pub grid: GridSpec,
    pub years: Option<(i32, i32)>,
    pub overrides: Vec<(i32, f64)>,
    pub samples: usize,
    pub seed: u64,
    pub return_periods: Vec<f64>,
}

impl FitConfig {
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&canonical)[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n_blocks: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub mean: f64,
    pub std_dev: Option<f64>,
    pub dropped: Vec<DroppedBlock>,
    pub overrides: Vec<(i32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub xi: f64,
    pub beta: f64,
    pub location: f64,
}

impl From<GevParams> for ParamPoint {
    fn from(p: GevParams) -> Self {
        Self { xi: p.xi(), beta: p.beta(), location: p.location() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

impl MarginalSummary {
    fn of(m: &MarginalDensity) -> CliResult<Self> {
        let q = |v: f64| -> CliResult<f64> { Ok(m.quantile(Probability::open(v)?)?) };
        Ok(Self { mean: m.mean(), median: q(0.5)?, q05: q(0.05)?, q95: q(0.95)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub xi: MarginalSummary,
    pub beta: MarginalSummary,
    pub correlation: Option<f64>,
    pub map: ParamPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevelRow {
    pub n_years: f64,
    pub alpha: f64,
    pub ml: f64,
    pub grid_mean: f64,
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
}

/// Level with a stated chance of never being exceeded over a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonRow {
    pub n_years: u32,
    pub p_noexceed: f64,
    pub ml: f64,
    pub grid_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub samples: usize,
    pub seed: u64,
    pub grid_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub config: FitConfig,
    pub data: DataSummary,
    pub ml: ParamPoint,
    pub posterior: PosteriorSummary,
    pub return_levels: Vec<ReturnLevelRow>,
    pub horizon: Vec<HorizonRow>,
    pub sampling: SamplingInfo,
}

pub fn alpha_for_period(n_years: f64) -> CliResult<Probability> {
    Ok(Probability::from_return_period(n_years)?)
}

/// ML, grid-exact and sampled statistics for one quantile level.
pub fn level_row(grid: &PosteriorGrid, samples: &ParamSamples, n_years: f64) -> CliResult<ReturnLevelRow> {
    alpha_row(grid, samples, alpha_for_period(n_years)?, n_years)
}

pub fn alpha_row(
    grid: &PosteriorGrid,
    samples: &ParamSamples,
    alpha: Probability,
    n_years: f64,
) -> CliResult<ReturnLevelRow> {
    let ml = return_level(&grid.ml_estimate(), alpha)?.level;
    let (grid_mean, _) = grid_expectation(grid, alpha)?;
    let drawn = return_levels(samples, alpha)?;
    let LevelSummary { mean, median, q05, q95, std_dev, skewness } = drawn.summary()?;
    Ok(ReturnLevelRow { n_years, alpha: alpha.value(), ml, grid_mean, mean, median, q05, q95, std_dev, skewness })
}

pub fn build_report(cache: &GridCache, config: &FitConfig) -> CliResult<AnalysisReport> {
    let grid = &cache.grid;
    let blocks = &cache.blocks;
    let years = blocks.years();
    let data = DataSummary {
        n_blocks: blocks.len(),
        first_year: years[0],
        last_year: *years.last().expect("blocks are nonempty"),
        mean: blocks.mean(),
        std_dev: blocks.std_dev().ok(),
        dropped: cache.dropped.clone(),
        overrides: cache.overrides.clone(),
    };

    let posterior = PosteriorSummary {
        xi: MarginalSummary::of(&grid.marginal(Axis::Shape))?,
        beta: MarginalSummary::of(&grid.marginal(Axis::Scale))?,
        correlation: grid.correlation().ok(),
        map: grid.map_estimate().into(),
    };

    let samples = sample_posterior(grid, config.samples, config.seed)?;
    let return_levels =
        config.return_periods.iter().map(|&n| level_row(grid, &samples, n)).collect::<CliResult<Vec<_>>>()?;

    let half = Probability::open(0.5)?;
    let horizon = config
        .return_periods
        .iter()
        .filter(|n| n.fract() == 0.0 && **n >= 1.0)
        .map(|&n| {
            let n_years = n as u32;
            let ml = horizon_level(&grid.ml_estimate(), n_years, half)?.level;
            let annual = Probability::open(0.5f64.powf(1.0 / n))?;
            let (grid_mean, _) = grid_expectation(grid, annual)?;
            Ok(HorizonRow { n_years, p_noexceed: 0.5, ml, grid_mean })
        })
        .collect::<CliResult<Vec<_>>>()?;

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        config: config.clone(),
        data,
        ml: grid.ml_estimate().into(),
        posterior,
        return_levels,
        horizon,
        sampling: SamplingInfo { samples: config.samples, seed: config.seed, grid_fingerprint: grid.fingerprint() },
    })
}
