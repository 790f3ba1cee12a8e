use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported dimension {0} (only d = 1 and d = 2 are supported)")]
    UnsupportedDimension(usize),

    #[error("noise characteristic function magnitude {magnitude:e} at frequency {frequency} is below the floor {floor:e}")]
    IllPosed {
        frequency: f64,
        magnitude: f64,
        floor: f64,
    },

    #[error("deconvolution kernel has imaginary residual {residual:e} at offset {offset} (noise law is not symmetric)")]
    AsymmetricNoise { offset: f64, residual: f64 },

    #[error("point {point:?} lies outside the kernel table coverage")]
    Coverage { point: Vec<f64> },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle inconsistency: excess risk {excess:e} is below -1e-6 (reference codebook was not optimal)")]
    OracleInconsistency { excess: f64 },

    #[error("replication with seed {seed} failed: {source}")]
    Replication {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::UnsupportedDimension(_)
            | Error::Config(_)
            | Error::NotApplicable(_)
            | Error::Io { .. } => 2,
            Error::IllPosed { .. }
            | Error::AsymmetricNoise { .. }
            | Error::Coverage { .. }
            | Error::Degenerate(_) => 3,
            Error::OracleInconsistency { .. } => 4,
            Error::Replication { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
