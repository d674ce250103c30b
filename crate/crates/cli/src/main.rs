use std::path::PathBuf;
use std::process::ExitCode;

use bayes_evt::{GridSpec, Units};
use bayes_evt_cli::commands::{
    self, CompareRequest, FitOptions, InputOptions, LevelRequest, ScanOptions, DEFAULT_SEED,
};
use bayes_evt_cli::flags::{parse_grid, parse_override, parse_years};
use bayes_evt_cli::CliResult;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bayes-evt", version, about = "Bayesian extreme-value analysis of annual rainfall maxima")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Daily CSVs (primary first, then fallbacks) or a single block-maxima CSV.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,

    #[arg(long, default_value = "inches")]
    units: Units,

    /// Minimum fraction of days observed for a year to count.
    #[arg(long, default_value_t = bayes_evt::ingest::DEFAULT_MIN_COVERAGE)]
    coverage: f64,

    #[arg(long, default_value = "DATE")]
    date_column: String,

    #[arg(long, default_value = "PRCP")]
    value_column: String,

    /// Restrict to years FROM:TO inclusive.
    #[arg(long, value_parser = parse_years)]
    years: Option<(i32, i32)>,

    /// Replace a year's maximum, YEAR=INCHES. Repeatable.
    #[arg(long = "override", value_parser = parse_override)]
    overrides: Vec<(i32, f64)>,
}

impl From<InputArgs> for InputOptions {
    fn from(a: InputArgs) -> Self {
        InputOptions {
            inputs: a.inputs,
            units: a.units,
            coverage: a.coverage,
            date_column: a.date_column,
            value_column: a.value_column,
            years: a.years,
            overrides: a.overrides,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit the posterior grid and write report.json and grid.json.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// xi:MIN:MAX:STEP,beta:MIN:MAX:STEP
        #[arg(long, value_parser = parse_grid)]
        grid: Option<GridSpec>,
        #[arg(long, default_value_t = bayes_evt::return_levels::DEFAULT_SAMPLE_COUNT)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_RETURN_PERIODS)]
        return_periods: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Return-level distributions from a saved grid.
    ReturnLevel {
        grid: PathBuf,
        #[arg(long, value_delimiter = ',')]
        return_periods: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = bayes_evt::return_levels::DEFAULT_SAMPLE_COUNT)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Write the sampled levels for the first requested level to levels.csv.
        #[arg(long)]
        emit_samples: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Two-sample KS scan over every admissible split year.
    Scan {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 30)]
        min_segment: usize,
        /// Also run a Mann-Kendall trend test.
        #[arg(long)]
        trend: bool,
        /// Also run a Welch t-test at the minimum-p split.
        #[arg(long)]
        t_test: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare return levels from two saved grids.
    Compare {
        grid_a: PathBuf,
        grid_b: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        alpha: f64,
        #[arg(long, default_value_t = bayes_evt::return_levels::DEFAULT_SAMPLE_COUNT)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "A")]
        label_a: String,
        #[arg(long, default_value = "B")]
        label_b: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Extract annual maxima and write block_maxima.csv.
    BlockMaxima {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit { input, grid, samples, seed, return_periods, out } => {
            let opts = FitOptions { grid: grid.unwrap_or_default(), samples, seed, return_periods };
            let report = commands::fit(&input.into(), &opts, &out)?;
            println!(
                "ml xi={:.4} beta={:.4}; {} blocks; wrote {}",
                report.ml.xi,
                report.ml.beta,
                report.data.n_blocks,
                out.display()
            );
        }
        Command::ReturnLevel { grid, return_periods, alphas, samples, seed, emit_samples, out } => {
            let req = LevelRequest { alphas, return_periods, samples, seed, emit_samples };
            let table = commands::return_level_cmd(&grid, &req, &out)?;
            for r in &table.rows {
                println!("N={:<8} ml={:.3} median={:.3} 90%=[{:.3}, {:.3}]", r.n_years, r.ml, r.median, r.q05, r.q95);
            }
        }
        Command::Scan { input, min_segment, trend, t_test, out } => {
            let opts = ScanOptions { min_segment, trend, t_test };
            let s = commands::scan(&input.into(), &opts, &out)?;
            println!("min p={:.4} at split {} ({} splits)", s.min_p.p_value.value(), s.min_p.split_year, s.splits);
        }
        Command::Compare { grid_a, grid_b, alpha, samples, seed, label_a, label_b, out } => {
            let req = CompareRequest { alpha, samples, seed, label_a, label_b };
            let c = commands::compare(&grid_a, &grid_b, &req, &out)?;
            println!(
                "P(A>B)={:.4}; membership a_in_b={:.4} b_in_a={:.4}",
                c.exceedance_a_over_b, c.membership.a_in_b, c.membership.b_in_a
            );
        }
        Command::BlockMaxima { input, out } => {
            let loaded = commands::block_maxima_cmd(&input.into(), &out)?;
            println!("{} years kept, {} dropped", loaded.maxima.len(), loaded.dropped.len());
            for d in &loaded.dropped {
                eprintln!("dropped {}: {:?}", d.year, d.reason);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
