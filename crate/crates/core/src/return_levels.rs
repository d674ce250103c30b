//! Return-level distributions pushed forward from posterior samples.

use std::cmp::Ordering;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::{return_level, GevParams, Probability};
use crate::posterior::PosteriorGrid;
use crate::stats;

pub const DEFAULT_SAMPLE_COUNT: usize = 10_000;

/// Categorical draws of grid cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSamples {
    pub draws: Vec<GevParams>,
    pub seed: u64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnLevelSamples {
    pub alpha: Probability,
    pub levels: Vec<f64>,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    pub std_dev: f64,
    /// `None` when the sample has zero variance.
    pub skewness: Option<f64>,
}

pub fn sample_posterior(grid: &PosteriorGrid, count: usize, seed: u64) -> Result<ParamSamples> {
    if count == 0 {
        return Err(Error::Domain("sample count must be at least one".into()));
    }
    let mut cum = Vec::with_capacity(grid.mass().len());
    let mut acc = 0.0;
    for m in grid.mass() {
        acc += m;
        cum.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = cum.len() - 1;
    let draws = (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let k = cum.partition_point(|&c| c <= u).min(last);
            grid.cell(k)
        })
        .collect();
    Ok(ParamSamples { draws, seed, source: grid.fingerprint() })
}

pub fn return_levels(samples: &ParamSamples, alpha: Probability) -> Result<ReturnLevelSamples> {
    let levels = samples.draws.iter().map(|p| return_level(p, alpha).map(|r| r.level)).collect::<Result<Vec<_>>>()?;
    Ok(ReturnLevelSamples { alpha, levels, source: format!("{}@{}", samples.source, samples.seed) })
}

/// Posterior mean and standard deviation of `η_α` summed exactly over cells.
pub fn grid_expectation(grid: &PosteriorGrid, alpha: Probability) -> Result<(f64, f64)> {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (k, &m) in grid.mass().iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let eta = return_level(&grid.cell(k), alpha)?.level;
        mean += m * eta;
        second += m * eta * eta;
    }
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

impl ReturnLevelSamples {
    pub fn summary(&self) -> Result<LevelSummary> {
        summary(self)
    }

    pub fn quantile(&self, q: Probability) -> Result<f64> {
        let mut sorted = self.levels.clone();
        sorted.sort_by(f64::total_cmp);
        stats::sorted_quantile(&sorted, q)
    }

    /// Single-column CSV with header `level_inches`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "level_inches")?;
        for v in &self.levels {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}

pub fn summary(levels: &ReturnLevelSamples) -> Result<LevelSummary> {
    let xs = &levels.levels;
    if xs.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = stats::mean(xs);
    let var = stats::central_moment(xs, mean, 2);
    Ok(LevelSummary {
        mean,
        median: stats::sorted_quantile(&sorted, Probability::open(0.5)?)?,
        q05: stats::sorted_quantile(&sorted, Probability::open(0.05)?)?,
        q95: stats::sorted_quantile(&sorted, Probability::open(0.95)?)?,
        std_dev: var.sqrt(),
        skewness: stats::skewness(xs).ok(),
    })
}

/// `P(A > B)` over all pairs, ties counting one half.
///
/// Computed exactly by merging the two sorted samples.
pub fn exceedance_probability(a: &ReturnLevelSamples, b: &ReturnLevelSamples) -> Result<Probability> {
    if a.alpha != b.alpha {
        return Err(Error::AlphaMismatch(a.alpha.value(), b.alpha.value()));
    }
    if a.levels.is_empty() || b.levels.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut xs = a.levels.clone();
    let mut ys = b.levels.clone();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);

    // Twice the number of winning pairs plus ties, kept in integers.
    let mut score: u128 = 0;
    let (mut below, mut upto) = (0usize, 0usize);
    for x in &xs {
        while below < ys.len() && ys[below].total_cmp(x) == Ordering::Less {
            below += 1;
        }
        upto = upto.max(below);
        while upto < ys.len() && ys[upto].total_cmp(x) != Ordering::Greater {
            upto += 1;
        }
        score += 2 * below as u128 + (upto - below) as u128;
    }
    let pairs = 2 * xs.len() as u128 * ys.len() as u128;
    Probability::new(score as f64 / pairs as f64)
}

/// Fraction of levels inside `[lo, hi]`.
pub fn interval_membership(levels: &ReturnLevelSamples, lo: f64, hi: f64) -> Result<Probability> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Domain(format!("interval must satisfy lo <= hi, got [{lo}, {hi}]")));
    }
    if levels.levels.is_empty() {
        return Err(Error::EmptyData);
    }
    let inside = levels.levels.iter().filter(|&&v| v >= lo && v <= hi).count();
    Probability::new(inside as f64 / levels.levels.len() as f64)
}
