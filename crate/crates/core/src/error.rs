//! Crate-level error type. Module-specific errors convert into this for
//! the CLI and demo front ends.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] crate::model::ParseError),

    #[error("structurally ill posed: {0}")]
    IllPosed(String),

    #[error("no applicable conversion: {0}")]
    NoConversion(String),

    #[error("iteration limit of {0} reached before the analysis succeeded")]
    IterationLimit(usize),

    #[error("probe exhaustion: {0}")]
    Probe(String),

    #[error("{0}")]
    Invalid(String),
}

impl From<crate::symbolic::ProbeError> for Error {
    fn from(e: crate::symbolic::ProbeError) -> Self {
        Error::Probe(e.to_string())
    }
}
