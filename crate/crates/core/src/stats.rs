//! Descriptive statistics shared by the report and sampling code.

use crate::error::{Error, Result};
use crate::gev::Probability;

/// Mean shifted by the first element, exact for constant samples.
pub fn mean(xs: &[f64]) -> f64 {
    let Some(&first) = xs.first() else {
        return f64::NAN;
    };
    first + xs.iter().map(|x| x - first).sum::<f64>() / xs.len() as f64
}

/// `(1/n) Σ (x - center)^k`.
pub fn central_moment(xs: &[f64], center: f64, k: i32) -> f64 {
    if is_constant(xs) {
        return 0.0;
    }
    xs.iter().map(|x| (x - center).powi(k)).sum::<f64>() / xs.len() as f64
}

fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn sample_std(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::SeriesTooShort { len: xs.len(), needed: 2 });
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Ok((ss / (xs.len() - 1) as f64).sqrt())
}

/// Standardized third central moment, `m3 / m2^(3/2)`, with `n` denominators.
pub fn skewness(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::SeriesTooShort { len: xs.len(), needed: 2 });
    }
    let m = mean(xs);
    let m2 = central_moment(xs, m, 2);
    if is_constant(xs) || m2 <= 0.0 {
        return Err(Error::ZeroVariance("skewness of a constant sample"));
    }
    Ok(central_moment(xs, m, 3) / m2.powf(1.5))
}

/// Smallest order statistic whose empirical cdf reaches `q`.
pub fn sorted_quantile(sorted: &[f64], q: Probability) -> Result<f64> {
    let q = q.value();
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {q}")));
    }
    if sorted.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = sorted.len();
    // First index i (0-based) with (i + 1) / n >= q.
    let mut idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    while idx > 0 && (idx as f64) / n as f64 >= q {
        idx -= 1;
    }
    while ((idx + 1) as f64) / (n as f64) < q {
        idx += 1;
    }
    Ok(sorted[idx])
}
