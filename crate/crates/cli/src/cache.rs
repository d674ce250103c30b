//! Persisted posterior grid (`grid.json`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use bayes_evt::ingest::DroppedBlock;
use bayes_evt::{BlockMaxima, PosteriorGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything a report is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCache {
    pub schema_version: u32,
    pub tool_version: String,
    pub fingerprint: String,
    pub blocks: BlockMaxima,
    pub dropped: Vec<DroppedBlock>,
    pub overrides: Vec<(i32, f64)>,
    pub grid: PosteriorGrid,
}

impl GridCache {
    pub fn new(
        grid: PosteriorGrid,
        blocks: BlockMaxima,
        dropped: Vec<DroppedBlock>,
        overrides: Vec<(i32, f64)>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            fingerprint: grid.fingerprint(),
            blocks,
            dropped,
            overrides,
            grid,
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let cache: GridCache = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        if cache.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "{}: unsupported schema_version {}",
                path.display(),
                cache.schema_version
            )));
        }
        if cache.grid.fingerprint() != cache.fingerprint {
            return Err(CliError::Parse(format!("{}: grid fingerprint mismatch", path.display())));
        }
        Ok(cache)
    }
}
