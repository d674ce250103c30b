//! Break and trend tests for block-maxima series.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::Probability;
use crate::ingest::BlockMaxima;
use crate::special::{kolmogorov_q, normal_two_sided, student_t_two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: Probability,
    pub n1: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitScanResult {
    /// Label of the first block in the second segment.
    pub split_year: i32,
    pub ks_statistic: f64,
    pub p_value: Probability,
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Sup-distance between right-continuous ECDFs, evaluated after each tied group.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    // Once one sample is exhausted the gap shrinks monotonically to zero.
    d
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyData);
    }
    let (sa, sb) = (sorted(a)?, sorted(b)?);
    let d = ks_statistic(&sa, &sb);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let lambda = d * (n1 * n2 / (n1 + n2)).sqrt();
    Ok(TestResult { statistic: d, p_value: Probability::new(kolmogorov_q(lambda))?, n1: a.len(), n2: Some(b.len()) })
}

/// Two-sample KS test at every admissible prefix/suffix split.
pub fn ks_split_scan(series: &BlockMaxima, min_segment: usize) -> Result<Vec<SplitScanResult>> {
    let values = series.values();
    let years = series.years();
    let needed = 2 * min_segment.max(1);
    if values.len() < needed {
        return Err(Error::SeriesTooShort { len: values.len(), needed });
    }
    let min_segment = min_segment.max(1);
    (min_segment..=values.len() - min_segment)
        .into_par_iter()
        .map(|k| {
            let r = ks_two_sample(&values[..k], &values[k..])?;
            Ok(SplitScanResult { split_year: years[k], ks_statistic: r.statistic, p_value: r.p_value })
        })
        .collect()
}

/// Split with the smallest p-value, earliest on ties.
pub fn min_p_split(scan: &[SplitScanResult]) -> Option<&SplitScanResult> {
    scan.iter().fold(None, |best: Option<&SplitScanResult>, r| match best {
        Some(b) if b.p_value.value() <= r.p_value.value() => Some(b),
        _ => Some(r),
    })
}

/// `split_year,ks_statistic,p_value` rows.
pub fn write_scan_csv<W: Write>(scan: &[SplitScanResult], mut out: W) -> Result<()> {
    writeln!(out, "split_year,ks_statistic,p_value")?;
    for r in scan {
        writeln!(out, "{},{},{}", r.split_year, r.ks_statistic, r.p_value.value())?;
    }
    Ok(())
}

/// Mann–Kendall score `S = Σ_{i<j} sign(y_j - y_i)`.
pub fn mann_kendall_s(series: &[f64]) -> i64 {
    let mut s = 0i64;
    for (i, &yi) in series.iter().enumerate() {
        for &yj in &series[i + 1..] {
            s += match yj.partial_cmp(&yi) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    s
}

/// Mann–Kendall trend test with tie-corrected variance and continuity correction.
pub fn mann_kendall(series: &[f64]) -> Result<TestResult> {
    let n = series.len();
    if n < 4 {
        return Err(Error::SeriesTooShort { len: n, needed: 4 });
    }
    let s = mann_kendall_s(series);
    let sv = sorted(series)?;
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sv[end] == sv[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        start = end;
    }
    let nf = n as f64;
    let var = (nf * (nf - 1.0) * (2.0 * nf + 5.0) - tie_term) / 18.0;
    if var <= 0.0 {
        return Err(Error::ZeroVariance("Mann-Kendall score of a fully tied series"));
    }
    let z = match s {
        0 => 0.0,
        s if s > 0 => (s - 1) as f64 / var.sqrt(),
        s => (s + 1) as f64 / var.sqrt(),
    };
    Ok(TestResult {
        statistic: s as f64,
        p_value: Probability::new(normal_two_sided(z).clamp(0.0, 1.0))?,
        n1: n,
        n2: None,
    })
}

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(Error::SeriesTooShort { len: xs.len(), needed: 2 });
        }
    }
    let moments = |xs: &[f64]| {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (n1, m1, v1) = moments(a);
    let (n2, m2, v2) = moments(b);
    let (w1, w2) = (v1 / n1, v2 / n2);
    let se2 = w1 + w2;
    if se2.is_nan() || se2 <= 0.0 {
        return Err(Error::ZeroVariance("both samples of the t-test are constant"));
    }
    let t = (m1 - m2) / se2.sqrt();
    let df = se2 * se2 / (w1 * w1 / (n1 - 1.0) + w2 * w2 / (n2 - 1.0));
    Ok(TestResult {
        statistic: t,
        p_value: Probability::new(student_t_two_sided(t, df))?,
        n1: a.len(),
        n2: Some(b.len()),
    })
}
