//! Flat-prior posterior of `(ξ, β)` evaluated on a rectangular grid.
//!
//! Cells are indexed row-major: one row per shape value, one column per scale
//! value. Grid points are the cell centers `min + i·(max - min)/(steps - 1)`,
//! so both bounds are evaluated and each cell extends half a step either side.
//!
//! The joint log-likelihood of the reduced GEV factors per shape row:
//!
//! ```text
//! ℓ(ξ, β) = -n ln β - (1 + 1/ξ)(n c + Σ ln y) - e^(-c/ξ) Σ y^(-1/ξ),   c = ln ξ - ln β
//! ```
//!
//! so every row needs one pass over the data and every cell is O(1).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gev::{GevParams, Probability};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_steps: usize,
}

impl Default for GridSpec {
    /// `ξ ∈ [0.05, 1.0]`, `β ∈ [0.1, 2.5]`, step 0.001 on both axes.
    fn default() -> Self {
        Self::from_step_sizes((0.05, 1.0, 0.001), (0.1, 2.5, 0.001)).expect("default grid is valid")
    }
}

fn axis_point(min: f64, max: f64, steps: usize, i: usize) -> f64 {
    if i + 1 == steps {
        max
    } else {
        min + (max - min) * i as f64 / (steps - 1) as f64
    }
}

fn steps_for(min: f64, max: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
    }
    let n = ((max - min) / step).round();
    if !(1.0..1e8).contains(&n) {
        return Err(Error::InvalidGrid(format!("step {step} does not fit in [{min}, {max}]")));
    }
    let steps = n as usize + 1;
    let implied = (max - min) / n;
    if ((implied - step) / step).abs() > 1e-6 {
        return Err(Error::InvalidGrid(format!("range [{min}, {max}] is not a whole number of {step} steps")));
    }
    Ok(steps)
}

impl GridSpec {
    pub fn new(
        (xi_min, xi_max, xi_steps): (f64, f64, usize),
        (beta_min, beta_max, beta_steps): (f64, f64, usize),
    ) -> Result<Self> {
        let spec = Self { xi_min, xi_max, xi_steps, beta_min, beta_max, beta_steps };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from `(min, max, step)` triples per axis.
    pub fn from_step_sizes(xi: (f64, f64, f64), beta: (f64, f64, f64)) -> Result<Self> {
        let xs = steps_for(xi.0, xi.1, xi.2)?;
        let bs = steps_for(beta.0, beta.1, beta.2)?;
        Self::new((xi.0, xi.1, xs), (beta.0, beta.1, bs))
    }

    pub fn validate(&self) -> Result<()> {
        let axis = |name: &str, min: f64, max: f64, steps: usize| -> Result<()> {
            if !(min > 0.0 && min < max && max.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "{name} bounds must satisfy 0 < min < max, got [{min}, {max}]"
                )));
            }
            if steps < 2 {
                return Err(Error::InvalidGrid(format!("{name} needs at least 2 steps, got {steps}")));
            }
            Ok(())
        };
        axis("shape", self.xi_min, self.xi_max, self.xi_steps)?;
        axis("scale", self.beta_min, self.beta_max, self.beta_steps)
    }

    pub fn xi_at(&self, i: usize) -> f64 {
        axis_point(self.xi_min, self.xi_max, self.xi_steps, i)
    }

    pub fn beta_at(&self, j: usize) -> f64 {
        axis_point(self.beta_min, self.beta_max, self.beta_steps, j)
    }

    pub fn xi_points(&self) -> Vec<f64> {
        (0..self.xi_steps).map(|i| self.xi_at(i)).collect()
    }

    pub fn beta_points(&self) -> Vec<f64> {
        (0..self.beta_steps).map(|j| self.beta_at(j)).collect()
    }

    pub fn xi_width(&self) -> f64 {
        (self.xi_max - self.xi_min) / (self.xi_steps - 1) as f64
    }

    pub fn beta_width(&self) -> f64 {
        (self.beta_max - self.beta_min) / (self.beta_steps - 1) as f64
    }

    pub fn cells(&self) -> usize {
        self.xi_steps * self.beta_steps
    }
}

/// Log-prior density over `(ξ, β)`, up to an additive constant.
pub trait LogPrior: Sync {
    fn log_density(&self, xi: f64, beta: f64) -> f64;
}

/// Uniform over the grid rectangle.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatPrior;

impl LogPrior for FlatPrior {
    fn log_density(&self, _xi: f64, _beta: f64) -> f64 {
        0.0
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> LogPrior for F {
    fn log_density(&self, xi: f64, beta: f64) -> f64 {
        self(xi, beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Shape,
    Scale,
}

/// Normalized posterior mass over grid cells.
///
/// Only the log-likelihood (and a non-flat log-prior) is persisted; mass is
/// recomputed on load.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    spec: GridSpec,
    n_obs: usize,
    log_like: Vec<f64>,
    log_prior: Option<Vec<f64>>,
    mass: Vec<f64>,
}

/// Log values with `-inf` written as `null`, which JSON cannot otherwise carry.
struct LogValues<'a>(&'a [f64]);

impl Serialize for LogValues<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&v| v.is_finite().then_some(v)))
    }
}

fn decode_log_values(raw: Vec<Option<f64>>) -> Vec<f64> {
    raw.into_iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect()
}

impl Serialize for PosteriorGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PosteriorGrid", 3 + usize::from(self.log_prior.is_some()))?;
        st.serialize_field("spec", &self.spec)?;
        st.serialize_field("n_obs", &self.n_obs)?;
        st.serialize_field("log_like", &LogValues(&self.log_like))?;
        if let Some(p) = &self.log_prior {
            st.serialize_field("log_prior", &LogValues(p))?;
        }
        st.end()
    }
}

#[derive(Deserialize)]
struct RawGrid {
    spec: GridSpec,
    n_obs: usize,
    log_like: Vec<Option<f64>>,
    #[serde(default)]
    log_prior: Option<Vec<Option<f64>>>,
}

impl<'de> Deserialize<'de> for PosteriorGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGrid::deserialize(d)?;
        PosteriorGrid::from_parts(
            raw.spec,
            raw.n_obs,
            decode_log_values(raw.log_like),
            raw.log_prior.map(decode_log_values),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Per-row sufficient statistics of the sorted data.
struct RowStats {
    n: f64,
    sum_ln_y: f64,
    ln_y: Vec<f64>,
}

impl RowStats {
    fn new(data: &[f64]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(&bad) = data.iter().find(|&&y| !(y > 0.0 && y.is_finite())) {
            return Err(Error::Domain(format!("observation must be positive and finite, got {bad}")));
        }
        // Sorting fixes the accumulation order so permuted inputs give identical grids.
        let mut ln_y: Vec<f64> = data.iter().map(|y| y.ln()).collect();
        ln_y.sort_by(f64::total_cmp);
        let sum_ln_y = ln_y.iter().sum();
        Ok(Self { n: ln_y.len() as f64, sum_ln_y, ln_y })
    }

    fn fill_row(&self, spec: &GridSpec, i: usize, prior: &dyn LogPrior, row: &mut [f64], pri: &mut [f64]) {
        let xi = spec.xi_at(i);
        let inv_xi = 1.0 / xi;
        let ln_xi = xi.ln();
        // ln Σ exp(-ln y / ξ), shifted by its maximum term.
        let peak = self.ln_y.iter().map(|l| -inv_xi * l).fold(f64::NEG_INFINITY, f64::max);
        let ln_s = peak + self.ln_y.iter().map(|l| (-inv_xi * l - peak).exp()).sum::<f64>().ln();
        for (j, (ll, lp)) in row.iter_mut().zip(pri.iter_mut()).enumerate() {
            let beta = spec.beta_at(j);
            let c = ln_xi - beta.ln();
            *ll = -self.n * beta.ln() - (1.0 + inv_xi) * (self.n * c + self.sum_ln_y) - (-inv_xi * c + ln_s).exp();
            *lp = prior.log_density(xi, beta);
        }
    }
}

/// Evaluates the flat-prior posterior, parallel across shape rows.
pub fn evaluate(data: &[f64], spec: &GridSpec) -> Result<PosteriorGrid> {
    build(data, spec, None, true)
}

/// Single-threaded reference path. Produces the same bits as [`evaluate`].
pub fn evaluate_serial(data: &[f64], spec: &GridSpec) -> Result<PosteriorGrid> {
    build(data, spec, None, false)
}

pub fn evaluate_with_prior(data: &[f64], spec: &GridSpec, prior: &dyn LogPrior) -> Result<PosteriorGrid> {
    build(data, spec, Some(prior), true)
}

fn build(data: &[f64], spec: &GridSpec, prior: Option<&dyn LogPrior>, parallel: bool) -> Result<PosteriorGrid> {
    spec.validate()?;
    let stats = RowStats::new(data)?;
    let width = spec.beta_steps;
    let p: &dyn LogPrior = prior.unwrap_or(&FlatPrior);
    let mut log_like = vec![0.0; spec.cells()];
    let mut log_prior = vec![0.0; spec.cells()];
    if parallel {
        log_like
            .par_chunks_mut(width)
            .zip(log_prior.par_chunks_mut(width))
            .enumerate()
            .for_each(|(i, (row, pri))| stats.fill_row(spec, i, p, row, pri));
    } else {
        for (i, (row, pri)) in log_like.chunks_mut(width).zip(log_prior.chunks_mut(width)).enumerate() {
            stats.fill_row(spec, i, p, row, pri);
        }
    }
    PosteriorGrid::assemble(*spec, data.len(), log_like, prior.map(|_| log_prior))
}

/// Max-shifted exponentiation followed by a row-major sum.
fn normalize(log_post: &[f64]) -> Result<Vec<f64>> {
    let peak = log_post.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::PosteriorVanished);
    }
    let mut mass: Vec<f64> = log_post.iter().map(|&v| if v.is_nan() { 0.0 } else { (v - peak).exp() }).collect();
    let total: f64 = mass.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::PosteriorVanished);
    }
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(mass)
}

impl PosteriorGrid {
    /// Builds a grid from precomputed log-likelihoods under a flat prior.
    pub fn from_log_likelihood(spec: GridSpec, n_obs: usize, log_like: Vec<f64>) -> Result<Self> {
        Self::from_parts(spec, n_obs, log_like, None)
    }

    /// Reassembles a persisted grid, checking shape before normalizing.
    pub fn from_parts(spec: GridSpec, n_obs: usize, log_like: Vec<f64>, log_prior: Option<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        if log_like.len() != spec.cells() || log_prior.as_ref().is_some_and(|p| p.len() != spec.cells()) {
            return Err(Error::InvalidGrid(format!("expected {} cells, got {}", spec.cells(), log_like.len())));
        }
        Self::assemble(spec, n_obs, log_like, log_prior)
    }

    fn assemble(spec: GridSpec, n_obs: usize, log_like: Vec<f64>, log_prior: Option<Vec<f64>>) -> Result<Self> {
        let mass = match &log_prior {
            None => normalize(&log_like)?,
            Some(p) => normalize(&log_like.iter().zip(p).map(|(l, q)| l + q).collect::<Vec<_>>())?,
        };
        Ok(Self { spec, n_obs, log_like, log_prior, mass })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn log_like(&self) -> &[f64] {
        &self.log_like
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Parameters at flat cell index `k` (row-major).
    pub fn cell(&self, k: usize) -> GevParams {
        let (i, j) = (k / self.spec.beta_steps, k % self.spec.beta_steps);
        GevParams::new(self.spec.xi_at(i), self.spec.beta_at(j)).expect("grid bounds are positive")
    }

    /// Short content hash identifying this grid.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for v in [self.spec.xi_min, self.spec.xi_max, self.spec.beta_min, self.spec.beta_max] {
            h.update(v.to_le_bytes());
        }
        h.update((self.spec.xi_steps as u64).to_le_bytes());
        h.update((self.spec.beta_steps as u64).to_le_bytes());
        h.update((self.n_obs as u64).to_le_bytes());
        for m in &self.mass {
            h.update(m.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    fn argmax(values: &[f64]) -> usize {
        // Strict comparison keeps the first maximum: smaller ξ, then smaller β.
        let mut best = 0;
        for (k, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = k;
            }
        }
        best
    }

    pub fn ml_estimate(&self) -> GevParams {
        self.cell(Self::argmax(&self.log_like))
    }

    pub fn map_estimate(&self) -> GevParams {
        self.cell(Self::argmax(&self.mass))
    }

    pub fn marginal(&self, axis: Axis) -> MarginalDensity {
        let w = self.spec.beta_steps;
        let (points, mass) = match axis {
            Axis::Shape => (self.spec.xi_points(), self.mass.chunks(w).map(|row| row.iter().sum()).collect()),
            Axis::Scale => {
                let mut acc = vec![0.0; w];
                for row in self.mass.chunks(w) {
                    acc.iter_mut().zip(row).for_each(|(a, m)| *a += m);
                }
                (self.spec.beta_points(), acc)
            }
        };
        MarginalDensity { axis, points, mass }
    }

    /// Posterior means `(E ξ, E β)` summed over all cells.
    pub fn means(&self) -> (f64, f64) {
        let (mut mx, mut mb) = (0.0, 0.0);
        for (k, m) in self.mass.iter().enumerate() {
            let p = self.cell(k);
            mx += m * p.xi();
            mb += m * p.beta();
        }
        (mx, mb)
    }

    /// Pearson correlation of `ξ` and `β` under the cell masses.
    pub fn correlation(&self) -> Result<f64> {
        let (mx, mb) = self.means();
        let (mut vx, mut vb, mut cov) = (0.0, 0.0, 0.0);
        for (k, m) in self.mass.iter().enumerate() {
            let p = self.cell(k);
            let (dx, db) = (p.xi() - mx, p.beta() - mb);
            vx += m * dx * dx;
            vb += m * db * db;
            cov += m * dx * db;
        }
        // Rounding leaves a residue of order eps·mean² on a degenerate axis.
        if vx <= 1e-14 * mx * mx {
            return Err(Error::ZeroVariance("posterior shape marginal"));
        }
        if vb <= 1e-14 * mb * mb {
            return Err(Error::ZeroVariance("posterior scale marginal"));
        }
        Ok((cov / (vx.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
    }
}

pub fn posterior_correlation(grid: &PosteriorGrid) -> Result<f64> {
    grid.correlation()
}

/// Improves the ML estimate with a finer local grid around the coarse argmax.
///
/// The local window spans `radius` coarse cells either side of the argmax and
/// is sampled `factor` times more finely.
pub fn refine_ml(data: &[f64], grid: &PosteriorGrid, radius: usize, factor: usize) -> Result<GevParams> {
    let coarse = grid.ml_estimate();
    let spec = grid.spec();
    let half_xi = radius as f64 * spec.xi_width();
    let half_beta = radius as f64 * spec.beta_width();
    let local = GridSpec::new(
        (
            (coarse.xi() - half_xi).max(spec.xi_min),
            (coarse.xi() + half_xi).min(spec.xi_max),
            2 * radius * factor.max(1) + 1,
        ),
        (
            (coarse.beta() - half_beta).max(spec.beta_min),
            (coarse.beta() + half_beta).min(spec.beta_max),
            2 * radius * factor.max(1) + 1,
        ),
    )?;
    Ok(evaluate(data, &local)?.ml_estimate())
}

/// One-dimensional posterior marginal on the grid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalDensity {
    pub axis: Axis,
    pub points: Vec<f64>,
    pub mass: Vec<f64>,
}

impl MarginalDensity {
    pub fn mean(&self) -> f64 {
        self.points.iter().zip(&self.mass).map(|(x, m)| x * m).sum()
    }

    /// Smallest grid point whose cumulative mass reaches `q`.
    pub fn quantile(&self, q: Probability) -> Result<f64> {
        let q = q.value();
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        let mut cum = 0.0;
        for (x, m) in self.points.iter().zip(&self.mass) {
            cum += m;
            if cum >= q {
                return Ok(*x);
            }
        }
        Ok(*self.points.last().expect("marginal is nonempty"))
    }

    /// Equal-tailed interval holding `level` of the mass.
    pub fn credible_interval(&self, level: f64) -> Result<(f64, f64)> {
        let tail = (1.0 - level) / 2.0;
        Ok((self.quantile(Probability::open(tail)?)?, self.quantile(Probability::open(1.0 - tail)?)?))
    }
}

pub fn marginal_mean(m: &MarginalDensity) -> f64 {
    m.mean()
}

pub fn marginal_quantile(m: &MarginalDensity, q: Probability) -> Result<f64> {
    m.quantile(q)
}
