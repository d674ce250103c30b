use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Coverage(String),

    #[error("{0}")]
    GridUnderflow(String),

    #[error("{0}")]
    InvalidRequest(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Coverage(_) => 3,
            CliError::GridUnderflow(_) => 4,
            CliError::InvalidRequest(_) => 5,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

impl From<bayes_evt::Error> for CliError {
    fn from(e: bayes_evt::Error) -> Self {
        use bayes_evt::Error as E;
        let msg = e.to_string();
        match e {
            E::Parse { .. } | E::Csv(_) | E::Json(_) | E::InvalidBlocks(_) => CliError::Parse(msg),
            E::NoBlocksRetained => CliError::Coverage(msg),
            E::PosteriorVanished => CliError::GridUnderflow(msg),
            E::Io(_) => CliError::Io(msg),
            E::Domain(_)
            | E::EmptyData
            | E::InvalidGrid(_)
            | E::ZeroVariance(_)
            | E::SeriesTooShort { .. }
            | E::AlphaMismatch(..)
            | E::UnitMismatch(..) => CliError::InvalidRequest(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Parse(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
