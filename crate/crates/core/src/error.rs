use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no observations supplied")]
    EmptyData,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("posterior mass vanished on grid; widen the grid bounds")]
    PosteriorVanished,

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("series of length {len} is too short; need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("return-level samples use different alpha ({0} vs {1})")]
    AlphaMismatch(f64, f64),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("unit mismatch: {0} vs {1}")]
    UnitMismatch(&'static str, &'static str),

    #[error("no blocks retained after coverage and support filtering")]
    NoBlocksRetained,

    #[error("invalid block maxima: {0}")]
    InvalidBlocks(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
