use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the discretization and solve pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("coefficient field is not positive: min sampled value {min} at ({x}, {y})")]
    NotPositive { min: f64, x: f64, y: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix block {block} is not symmetric positive definite")]
    NotSpd { block: usize },

    #[error("factorization breakdown at pivot block {block} (|pivot| = {pivot:e})")]
    Breakdown { block: usize, pivot: f64 },

    #[error("band incomplete: inertia count {expected}, converged {found} (subspace {subspace})")]
    Incomplete {
        expected: usize,
        found: usize,
        subspace: usize,
    },

    #[error("{0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::NotPositive { .. } => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
