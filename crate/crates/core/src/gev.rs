//! Reduced two-parameter GEV in its Fréchet form.
//!
//! The Jenkinson–von Mises form `H(y) = exp(-(1 + ξy)^(-1/ξ))` becomes, after
//! rescaling by `β` and fixing the location at `μ = β/ξ` (so that the support
//! starts at zero),
//!
//! ```text
//! H(y; ξ, β) = exp(-(ξ y / β)^(-1/ξ)),   y > 0,  ξ > 0,  β > 0
//! ```
//!
//! Only this reduced family is implemented. Powers are evaluated in the log
//! domain, `(ξy/β)^(-1/ξ) = exp(-(1/ξ) ln(ξy/β))`.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape and scale of the reduced GEV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    xi: f64,
    beta: f64,
}

impl GevParams {
    pub fn new(xi: f64, beta: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::Domain(format!("shape must be positive, got {xi}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {beta}")));
        }
        Ok(Self { xi, beta })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Implied location `β/ξ`.
    pub fn location(&self) -> f64 {
        self.beta / self.xi
    }

    /// `ln(ξ y / β)`.
    #[inline]
    fn log_z(&self, y: f64) -> f64 {
        self.xi.ln() + y.ln() - self.beta.ln()
    }
}

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("probability must lie in [0, 1], got {value}")))
        }
    }

    /// Probability strictly inside `(0, 1)`, as required for quantile levels.
    pub fn open(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("probability must lie in (0, 1), got {value}")))
        }
    }

    /// Quantile level of the `n`-year return level, `1 - 1/n`.
    pub fn from_return_period(n_years: f64) -> Result<Self> {
        Self::open(1.0 - 1.0 / n_years)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Quantile `η_α` of the annual-maximum distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevel {
    pub level: f64,
    pub alpha: Probability,
}

impl ReturnLevel {
    /// Return period `1 / (1 - α)` in blocks (years).
    pub fn n_years(&self) -> f64 {
        1.0 / (1.0 - self.alpha.value())
    }
}

fn check_support(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("observation must be positive and finite, got {y}")))
    }
}

pub fn gev_cdf(params: &GevParams, y: f64) -> Result<Probability> {
    check_support(y)?;
    let t = (-params.log_z(y) / params.xi).exp();
    Ok(Probability((-t).exp()))
}

pub fn gev_log_pdf(params: &GevParams, y: f64) -> Result<f64> {
    check_support(y)?;
    let lz = params.log_z(y);
    let inv_xi = 1.0 / params.xi;
    Ok(-params.beta.ln() - (1.0 + inv_xi) * lz - (-inv_xi * lz).exp())
}

/// Sum of log-densities over independent block maxima.
pub fn joint_log_likelihood(params: &GevParams, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    data.iter().try_fold(0.0, |acc, &y| Ok(acc + gev_log_pdf(params, y)?))
}

/// `η_α = (β/ξ) (-ln α)^(-ξ)`.
pub fn return_level(params: &GevParams, alpha: Probability) -> Result<ReturnLevel> {
    let a = alpha.value();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {a}")));
    }
    let level = params.location() * (-params.xi * (-a.ln()).ln()).exp();
    Ok(ReturnLevel { level, alpha })
}

/// Probability that the `α` quantile is exceeded at least once in `n_years`
/// independent blocks: `1 - α^N`.
pub fn horizon_exceedance_probability(alpha: Probability, n_years: u32) -> Result<Probability> {
    let a = alpha.value();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {a}")));
    }
    if n_years == 0 {
        return Err(Error::Domain("horizon must be at least one year".into()));
    }
    Ok(Probability(-(f64::from(n_years) * a.ln()).exp_m1()))
}

/// Level whose probability of never being exceeded over `n_years` blocks is
/// `p_noexceed`, i.e. the quantile of the N-block maximum `H^N`.
pub fn horizon_level(params: &GevParams, n_years: u32, p_noexceed: Probability) -> Result<ReturnLevel> {
    if n_years == 0 {
        return Err(Error::Domain("horizon must be at least one year".into()));
    }
    let p = p_noexceed.value();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let annual = Probability(p.powf(1.0 / f64::from(n_years)));
    return_level(params, annual)
}

/// Inverse-cdf draw for a uniform `u` in `(0, 1)`.
#[inline]
pub fn gev_quantile_from_uniform(params: &GevParams, u: f64) -> f64 {
    params.location() * (-params.xi * (-u.ln()).ln()).exp()
}

pub fn sample_gev<R: Rng + ?Sized>(params: &GevParams, count: usize, rng: &mut R) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("sample count must be at least one".into()));
    }
    Ok((0..count).map(|_| gev_quantile_from_uniform(params, rng.sample(Open01))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(xi: f64, beta: f64) -> GevParams {
        GevParams::new(xi, beta).unwrap()
    }

    fn fd_density(params: &GevParams, y: f64, h: f64) -> f64 {
        let hi = gev_cdf(params, y + h).unwrap().value();
        let lo = gev_cdf(params, y - h).unwrap().value();
        (hi - lo) / (2.0 * h)
    }

    #[test]
    fn rejects_nonpositive_params() {
        assert!(GevParams::new(0.0, 1.0).is_err());
        assert!(GevParams::new(0.3, -1.0).is_err());
        assert!(GevParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn cdf_closed_forms() {
        let v = gev_cdf(&p(0.5, 1.0), 2.0).unwrap().value();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        let v = gev_cdf(&p(1.0, 1.0), 2.0).unwrap().value();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn cdf_at_ml_hundred_year_level() {
        let v = gev_cdf(&p(0.3176, 0.7833), 10.63).unwrap().value();
        assert!((v - 0.99).abs() < 5e-4, "{v}");
    }

    #[test]
    fn cdf_rejects_zero_and_negative() {
        assert!(gev_cdf(&p(0.5, 1.0), 0.0).is_err());
        assert!(gev_cdf(&p(0.5, 1.0), -1.0).is_err());
        assert!(gev_log_pdf(&p(0.5, 1.0), 0.0).is_err());
    }

    #[test]
    fn log_pdf_unit_params() {
        assert_eq!(gev_log_pdf(&p(1.0, 1.0), 1.0).unwrap(), -1.0);
    }

    #[test]
    fn log_pdf_matches_finite_difference_at_sample_mean() {
        let params = p(0.3176, 0.7833);
        let fd = fd_density(&params, 3.21, 1e-6);
        let exact = gev_log_pdf(&params, 3.21).unwrap().exp();
        assert!(((exact - fd) / fd).abs() < 1e-4);
    }

    #[test]
    fn log_pdf_near_origin_is_very_negative() {
        let v = gev_log_pdf(&p(0.5, 2.0), 1e-8).unwrap();
        assert!(v < -1e6, "{v}");
        assert!(v.is_finite());
    }

    #[test]
    fn joint_likelihood_is_additive() {
        let params = p(1.0, 1.0);
        assert_eq!(joint_log_likelihood(&params, &[1.0]).unwrap(), -1.0);
        let single = joint_log_likelihood(&params, &[2.7]).unwrap();
        let double = joint_log_likelihood(&params, &[2.7, 2.7]).unwrap();
        assert_eq!(double, 2.0 * single);
        assert!(matches!(joint_log_likelihood(&params, &[]), Err(Error::EmptyData)));
        assert!(joint_log_likelihood(&params, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn return_levels_from_ml_estimates() {
        let params = p(0.3176, 0.7833);
        let r99 = return_level(&params, Probability::open(0.99).unwrap()).unwrap();
        assert!((r99.level - 10.63).abs() < 0.01, "{}", r99.level);
        assert!((r99.n_years() - 100.0).abs() < 1e-9);
        let r90 = return_level(&params, Probability::open(0.90).unwrap()).unwrap();
        assert!((r90.level - 5.04).abs() < 0.01, "{}", r90.level);
    }

    #[test]
    fn return_level_at_inverse_e_is_location() {
        let params = p(0.41, 1.7);
        let r = return_level(&params, Probability::open((-1.0f64).exp()).unwrap()).unwrap();
        assert_eq!(r.level, params.location());
    }

    #[test]
    fn return_level_rejects_boundary_alpha() {
        let params = p(0.3, 1.0);
        assert!(return_level(&params, Probability::new(0.0).unwrap()).is_err());
        assert!(return_level(&params, Probability::new(1.0).unwrap()).is_err());
        assert!(Probability::from_return_period(1.0).is_err());
    }

    #[test]
    fn horizon_probabilities() {
        let a = Probability::open(0.99).unwrap();
        let p100 = horizon_exceedance_probability(a, 100).unwrap().value();
        assert!((p100 - 0.6340).abs() < 5e-4);
        let p1 = horizon_exceedance_probability(a, 1).unwrap().value();
        assert!((p1 - 0.01).abs() < 1e-15);
        let half = horizon_exceedance_probability(Probability::open(0.5).unwrap(), 2).unwrap();
        assert_eq!(half.value(), 0.75);
        assert!(horizon_exceedance_probability(a, 0).is_err());
    }

    #[test]
    fn horizon_levels() {
        let params = p(0.3176, 0.7833);
        let half = Probability::open(0.5).unwrap();
        let lvl = horizon_level(&params, 100, half).unwrap().level;
        assert!((lvl - 11.96).abs() < 0.02, "{lvl}");

        let a = Probability::open(0.97).unwrap();
        assert_eq!(horizon_level(&params, 1, a).unwrap().level, return_level(&params, a).unwrap().level);

        let lvl = horizon_level(&p(0.5, 1.0), 4, Probability::open((-4.0f64).exp()).unwrap()).unwrap().level;
        assert!((lvl - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_cdf_identity() {
        let params = p(0.3, 0.8);
        let y = gev_quantile_from_uniform(&params, (-1.0f64).exp());
        assert!((y - params.location()).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = p(0.3, 0.8);
        let a = sample_gev(&params, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_gev(&params, 100, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&y| y > 0.0));
        assert!(sample_gev(&params, 0, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn sample_ecdf_matches_cdf() {
        let params = p(0.3, 0.8);
        let mut draws = sample_gev(&params, 100_000, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        draws.sort_by(f64::total_cmp);
        let n = draws.len() as f64;
        let sup = draws
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let f = gev_cdf(&params, y).unwrap().value();
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.01, "{sup}");
    }

    /// Composite Simpson in `ln y`, independent of the cdf code path.
    fn integrate_density(params: &GevParams, upper: f64) -> f64 {
        let lo = (upper * 1e-12).ln();
        let hi = upper.ln();
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let f = |u: f64| {
            let y = u.exp();
            gev_log_pdf(params, y).unwrap().exp() * y
        };
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    proptest! {
        #[test]
        fn cdf_quantile_round_trip(xi in 0.05f64..1.0, beta in 0.1f64..3.0, a in 0.001f64..0.999) {
            let params = p(xi, beta);
            let lvl = return_level(&params, Probability::open(a).unwrap()).unwrap().level;
            let back = gev_cdf(&params, lvl).unwrap().value();
            prop_assert!(((back - a) / a).abs() < 1e-10);
        }

        #[test]
        fn monotone_in_alpha_and_y(xi in 0.05f64..1.0, beta in 0.1f64..3.0, a in 0.01f64..0.98, d in 1e-4f64..0.01) {
            let params = p(xi, beta);
            let r1 = return_level(&params, Probability::open(a).unwrap()).unwrap().level;
            let r2 = return_level(&params, Probability::open(a + d).unwrap()).unwrap().level;
            prop_assert!(r2 > r1);
            prop_assert!(gev_cdf(&params, r2).unwrap() > gev_cdf(&params, r1).unwrap());
        }

        #[test]
        fn density_integrates_to_one(xi in 0.05f64..1.0, beta in 0.1f64..3.0) {
            let params = p(xi, beta);
            let upper = 10.0 * return_level(&params, Probability::open(0.999).unwrap()).unwrap().level;
            let mass = integrate_density(&params, upper);
            prop_assert!((0.999..1.0 + 1e-6).contains(&mass), "{}", mass);
        }

        #[test]
        fn density_matches_cdf_derivative(xi in 0.05f64..1.0, beta in 0.1f64..3.0, a in 0.05f64..0.95) {
            let params = p(xi, beta);
            let y = return_level(&params, Probability::open(a).unwrap()).unwrap().level;
            let fd = fd_density(&params, y, 1e-6 * y);
            let exact = gev_log_pdf(&params, y).unwrap().exp();
            prop_assert!(((exact - fd) / exact).abs() < 1e-4);
        }

        #[test]
        fn scale_equivariance(xi in 0.05f64..1.0, beta in 0.1f64..3.0, c in 0.01f64..100.0, a in 0.01f64..0.999) {
            let alpha = Probability::open(a).unwrap();
            let base = return_level(&p(xi, beta), alpha).unwrap().level;
            let scaled = return_level(&p(xi, c * beta), alpha).unwrap().level;
            prop_assert!((scaled - c * base).abs() <= 1e-12 * scaled.abs());
        }

        #[test]
        fn horizon_level_inverts_block_cdf(xi in 0.05f64..1.0, beta in 0.1f64..3.0, n in 1u32..500, pr in 0.05f64..0.95) {
            let params = p(xi, beta);
            let pn = Probability::open(pr).unwrap();
            let lvl = horizon_level(&params, n, pn).unwrap().level;
            let direct = return_level(&params, Probability::open(pr.powf(1.0 / n as f64)).unwrap()).unwrap().level;
            prop_assert_eq!(lvl, direct);
            let back = gev_cdf(&params, lvl).unwrap().value().powi(n as i32);
            prop_assert!((back - pr).abs() < 1e-8);
        }
    }
}
