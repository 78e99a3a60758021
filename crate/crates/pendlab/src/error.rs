use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the pendulum library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: chain has {expected} links, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear system singular or ill-conditioned (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("non-finite state derivative at t = {time}")]
    NonFinite { time: f64 },

    #[error("amplitude {theta0} rad outside [0, pi): period correction series diverges")]
    AmplitudeOutOfRange { theta0: f64 },

    #[error("no complete cycle detected for bob {bob_index}")]
    NoCycleDetected { bob_index: usize },

    #[error("no bob produced a period estimate")]
    AllBobsFailed,

    #[error("degenerate convergence study: refined solutions coincide")]
    DegenerateConvergence,

    #[error("decimal error undefined: {0}")]
    DecimalErrorUndefined(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
