//! Writes a synthetic annual-maxima CSV drawn from a known GEV.
//!
//! cargo run -p bayes-evt-cli --example synthesize -- OUT.csv [XI BETA FIRST_YEAR YEARS SEED]

use std::fs::File;

use bayes_evt::ingest::Block;
use bayes_evt::{sample_gev, BlockMaxima, GevParams, Units};
use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn days_in_year(year: i32) -> u32 {
    let start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(year + 1, 1, 1).unwrap();
    (end - start).num_days() as u32
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().ok_or("usage: synthesize OUT.csv [XI BETA FIRST_YEAR YEARS SEED]")?;
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let xi: f64 = arg(1, "0.32").parse()?;
    let beta: f64 = arg(2, "0.78").parse()?;
    let first_year: i32 = arg(3, "1938").parse()?;
    let years: usize = arg(4, "84").parse()?;
    let seed: u64 = arg(5, "84").parse()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = sample_gev(&GevParams::new(xi, beta)?, years, &mut rng)?;
    // Gauges report hundredths of an inch.
    let blocks = draws
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let year = first_year + i as i32;
            Block { year, max: (v * 100.0).round() / 100.0, days_observed: days_in_year(year) }
        })
        .collect();
    BlockMaxima::new(blocks, Units::Inches)?.write_csv(File::create(out)?)?;
    Ok(())
}
