use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bayes_evt::ingest::DroppedBlock;
use bayes_evt::stationarity::{min_p_split, write_scan_csv};
use bayes_evt::{
    block_maxima, evaluate, exceedance_probability, interval_membership, ks_split_scan, mann_kendall, merge_series,
    parse_daily_csv, return_levels, sample_posterior, welch_t_test, BlockMaxima, GridSpec, ParseConfig, Probability,
    SplitScanResult, TestResult, Units,
};
use serde::{Deserialize, Serialize};

use crate::cache::{GridCache, SCHEMA_VERSION};
use crate::error::{CliError, CliResult};
use crate::report::{alpha_for_period, alpha_row, build_report, level_row, AnalysisReport, FitConfig, ReturnLevelRow};

pub const DEFAULT_SEED: u64 = 19_382_021;
pub const DEFAULT_RETURN_PERIODS: [f64; 4] = [10.0, 25.0, 100.0, 500.0];
pub const COMPARE_RETURN_PERIODS: [f64; 3] = [10.0, 25.0, 100.0];

#[derive(Debug, Clone)]
pub struct InputOptions {
    /// Primary file first; later files fill dates the earlier ones lack.
    pub inputs: Vec<PathBuf>,
    pub units: Units,
    pub coverage: f64,
    pub date_column: String,
    pub value_column: String,
    pub years: Option<(i32, i32)>,
    pub overrides: Vec<(i32, f64)>,
}

impl Default for InputOptions {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            units: Units::Inches,
            coverage: bayes_evt::ingest::DEFAULT_MIN_COVERAGE,
            date_column: "DATE".into(),
            value_column: "PRCP".into(),
            years: None,
            overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedBlocks {
    pub maxima: BlockMaxima,
    pub dropped: Vec<DroppedBlock>,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn is_block_maxima_csv(path: &Path) -> CliResult<bool> {
    let mut first = String::new();
    open(path)?.read_line(&mut first)?;
    Ok(first.split(',').any(|h| h.trim().trim_matches('"') == "max_inches"))
}

fn with_path<T>(path: &Path, r: bayes_evt::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let err = CliError::from(e);
        let code = err.exit_code();
        let msg = format!("{}: {err}", path.display());
        match code {
            2 => CliError::Parse(msg),
            3 => CliError::Coverage(msg),
            4 => CliError::GridUnderflow(msg),
            5 => CliError::InvalidRequest(msg),
            _ => CliError::Io(msg),
        }
    })
}

/// Reads daily or block-maxima CSVs, then applies overrides and the year filter.
pub fn load_blocks(opts: &InputOptions) -> CliResult<LoadedBlocks> {
    let Some(first) = opts.inputs.first() else {
        return Err(CliError::InvalidRequest("no input files given".into()));
    };
    let (maxima, dropped) = if is_block_maxima_csv(first)? {
        if opts.inputs.len() > 1 {
            return Err(CliError::InvalidRequest("a block-maxima CSV cannot be merged with other inputs".into()));
        }
        (with_path(first, BlockMaxima::read_csv(open(first)?))?, Vec::new())
    } else {
        let config = ParseConfig {
            date_column: opts.date_column.clone(),
            value_column: opts.value_column.clone(),
            units: opts.units,
            ..ParseConfig::default()
        };
        let mut merged = None;
        for path in &opts.inputs {
            let (series, stats) = with_path(path, parse_daily_csv(open(path)?, &config))?;
            if stats.skipped_blank > 0 {
                eprintln!("{}: skipped {} rows with blank values", path.display(), stats.skipped_blank);
            }
            merged = Some(match merged {
                None => series,
                Some(acc) => merge_series(&acc, &series)?,
            });
        }
        let extraction = block_maxima(&merged.expect("at least one input"), opts.coverage)?;
        (extraction.maxima, extraction.dropped)
    };

    let mut maxima = maxima;
    for &(year, value) in &opts.overrides {
        maxima = maxima.with_override(year, value)?;
    }
    if let Some((from, to)) = opts.years {
        maxima = maxima.filter_years(from, to)?;
    }
    Ok(LoadedBlocks { maxima, dropped })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

pub fn block_maxima_cmd(opts: &InputOptions, out: &Path) -> CliResult<LoadedBlocks> {
    let loaded = load_blocks(opts)?;
    ensure_dir(out)?;
    let mut w = BufWriter::new(File::create(out.join("block_maxima.csv"))?);
    loaded.maxima.write_csv(&mut w)?;
    w.flush()?;
    Ok(loaded)
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub grid: GridSpec,
    pub samples: usize,
    pub seed: u64,
    pub return_periods: Vec<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            samples: bayes_evt::return_levels::DEFAULT_SAMPLE_COUNT,
            seed: DEFAULT_SEED,
            return_periods: DEFAULT_RETURN_PERIODS.to_vec(),
        }
    }
}

/// Writes `report.json` and `grid.json`.
pub fn fit(inputs: &InputOptions, fit: &FitOptions, out: &Path) -> CliResult<AnalysisReport> {
    let loaded = load_blocks(inputs)?;
    let grid = evaluate(&loaded.maxima.values(), &fit.grid)?;
    let cache = GridCache::new(grid, loaded.maxima, loaded.dropped, inputs.overrides.clone());
    let config = FitConfig {
        units: inputs.units,
        coverage: inputs.coverage,
        grid: fit.grid,
        years: inputs.years,
        overrides: inputs.overrides.clone(),
        samples: fit.samples,
        seed: fit.seed,
        return_periods: fit.return_periods.clone(),
    };
    let report = build_report(&cache, &config)?;
    ensure_dir(out)?;
    cache.write(&out.join("grid.json"))?;
    write_json(&out.join("report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevelTable {
    pub schema_version: u32,
    pub grid_fingerprint: String,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<ReturnLevelRow>,
    /// Quantile level whose draws are in `levels.csv`, when written.
    pub samples_csv_alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LevelRequest {
    pub alphas: Vec<f64>,
    pub return_periods: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub emit_samples: bool,
}

/// `(alpha, N)` pairs, return periods first.
fn requested_alphas(req: &LevelRequest) -> CliResult<Vec<(Probability, f64)>> {
    let mut out = Vec::new();
    for &n in &req.return_periods {
        let alpha = alpha_for_period(n).map_err(|_| {
            CliError::InvalidRequest(format!("return period {n} gives a quantile level outside (0, 1)"))
        })?;
        out.push((alpha, n));
    }
    for &a in &req.alphas {
        let alpha = Probability::open(a).map_err(|e| CliError::InvalidRequest(e.to_string()))?;
        out.push((alpha, 1.0 / (1.0 - a)));
    }
    if out.is_empty() {
        return Err(CliError::InvalidRequest("no return periods or alphas requested".into()));
    }
    Ok(out)
}

/// Writes `return_levels.json` and, on request, `levels.csv`.
pub fn return_level_cmd(cache_path: &Path, req: &LevelRequest, out: &Path) -> CliResult<ReturnLevelTable> {
    let alphas = requested_alphas(req)?;
    let cache = GridCache::read(cache_path)?;
    let samples = sample_posterior(&cache.grid, req.samples, req.seed)?;
    let rows = alphas.iter().map(|&(a, n)| alpha_row(&cache.grid, &samples, a, n)).collect::<CliResult<Vec<_>>>()?;
    ensure_dir(out)?;
    let mut samples_csv_alpha = None;
    if req.emit_samples {
        let drawn = return_levels(&samples, alphas[0].0)?;
        let mut w = BufWriter::new(File::create(out.join("levels.csv"))?);
        drawn.write_csv(&mut w)?;
        w.flush()?;
        samples_csv_alpha = Some(alphas[0].0.value());
    }
    let table = ReturnLevelTable {
        schema_version: SCHEMA_VERSION,
        grid_fingerprint: cache.fingerprint,
        samples: req.samples,
        seed: req.seed,
        rows,
        samples_csv_alpha,
    };
    write_json(&out.join("return_levels.json"), &table)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub schema_version: u32,
    pub n_blocks: usize,
    pub min_segment: usize,
    pub splits: usize,
    pub min_p: SplitScanResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mann_kendall: Option<TestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub welch_at_min_p: Option<TestResult>,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub min_segment: usize,
    pub trend: bool,
    pub t_test: bool,
}

/// Writes `scan.csv` and `scan.json`.
pub fn scan(inputs: &InputOptions, opts: &ScanOptions, out: &Path) -> CliResult<ScanSummary> {
    let loaded = load_blocks(inputs)?;
    let series = &loaded.maxima;
    let results = ks_split_scan(series, opts.min_segment)?;
    let best = *min_p_split(&results).expect("scan has at least one split");
    let values = series.values();
    let mann_kendall = if opts.trend { Some(mann_kendall(&values)?) } else { None };
    let welch_at_min_p = if opts.t_test {
        let k = series.years().iter().position(|&y| y == best.split_year).expect("split year is in series");
        Some(welch_t_test(&values[..k], &values[k..])?)
    } else {
        None
    };
    ensure_dir(out)?;
    let mut w = BufWriter::new(File::create(out.join("scan.csv"))?);
    write_scan_csv(&results, &mut w)?;
    w.flush()?;
    let summary = ScanSummary {
        schema_version: SCHEMA_VERSION,
        n_blocks: series.len(),
        min_segment: opts.min_segment,
        splits: results.len(),
        min_p: best,
        mann_kendall,
        welch_at_min_p,
    };
    write_json(&out.join("scan.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortInterval {
    pub cohort: String,
    pub n_years: f64,
    pub ml: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    /// Fraction of A's draws inside B's 90% interval.
    pub a_in_b: f64,
    /// Fraction of B's draws inside A's 90% interval.
    pub b_in_a: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub label_a: String,
    pub label_b: String,
    pub fingerprint_a: String,
    pub fingerprint_b: String,
    pub alpha: f64,
    pub samples: usize,
    pub seed: u64,
    /// `P(A > B)` for independent draws, ties counted one half.
    pub exceedance_a_over_b: f64,
    pub membership: Membership,
    pub intervals: Vec<CohortInterval>,
}

#[derive(Debug, Clone)]
pub struct CompareRequest {
    pub alpha: f64,
    pub samples: usize,
    pub seed: u64,
    pub label_a: String,
    pub label_b: String,
}

/// Writes `compare.json` and `intervals.csv`.
pub fn compare(a_path: &Path, b_path: &Path, req: &CompareRequest, out: &Path) -> CliResult<Comparison> {
    let alpha = Probability::open(req.alpha).map_err(|e| CliError::InvalidRequest(e.to_string()))?;
    let a = GridCache::read(a_path)?;
    let b = GridCache::read(b_path)?;
    let sa = sample_posterior(&a.grid, req.samples, req.seed)?;
    let sb = sample_posterior(&b.grid, req.samples, req.seed)?;
    let la = return_levels(&sa, alpha)?;
    let lb = return_levels(&sb, alpha)?;
    let exceedance = exceedance_probability(&la, &lb)?.value();
    let (ra, rb) = (la.summary()?, lb.summary()?);
    let a_in_b = interval_membership(&la, rb.q05, rb.q95)?.value();
    let b_in_a = interval_membership(&lb, ra.q05, ra.q95)?.value();

    let mut intervals = Vec::new();
    for (label, cache, samples) in [(&req.label_a, &a, &sa), (&req.label_b, &b, &sb)] {
        for &n in &COMPARE_RETURN_PERIODS {
            let row = level_row(&cache.grid, samples, n)?;
            intervals.push(CohortInterval {
                cohort: label.clone(),
                n_years: n,
                ml: row.ml,
                median: row.median,
                q05: row.q05,
                q95: row.q95,
            });
        }
    }

    ensure_dir(out)?;
    let mut w = BufWriter::new(File::create(out.join("intervals.csv"))?);
    writeln!(w, "cohort,n_years,ml,median,q05,q95")?;
    for r in &intervals {
        writeln!(w, "{},{},{},{},{},{}", r.cohort, r.n_years, r.ml, r.median, r.q05, r.q95)?;
    }
    w.flush()?;

    let cmp = Comparison {
        schema_version: SCHEMA_VERSION,
        label_a: req.label_a.clone(),
        label_b: req.label_b.clone(),
        fingerprint_a: a.fingerprint,
        fingerprint_b: b.fingerprint,
        alpha: alpha.value(),
        samples: req.samples,
        seed: req.seed,
        exceedance_a_over_b: exceedance,
        membership: Membership { a_in_b, b_in_a, mean: (a_in_b + b_in_a) / 2.0 },
        intervals,
    };
    write_json(&out.join("compare.json"), &cmp)?;
    Ok(cmp)
}
