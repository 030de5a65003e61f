use thiserror::Error;

/// Errors produced by network construction, solvers, and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("conductance {value} on edge ({u}, {v}) is negative")]
    NegativeConductance { u: usize, v: usize, value: f64 },

    #[error("self-loop with positive conductance at vertex {0}")]
    SelfLoop(usize),

    #[error("network is disconnected: vertex {unreachable} is not reachable from {from}")]
    Disconnected { from: usize, unreachable: usize },

    #[error("network has no vertices or no edges")]
    EmptyNetwork,

    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),

    #[error("function is missing a value at vertex {0}")]
    MissingValue(usize),

    #[error("dipole source must differ from the origin")]
    OriginDipole,

    #[error("linear system is singular; network data is inconsistent")]
    SingularSystem,

    #[error("index set F must be nonempty")]
    EmptyIndexSet,

    #[error("index set contains the origin or an out-of-range vertex: {0}")]
    BadIndexSet(usize),

    #[error("matrix is not positive definite: eigenvalue {0} is not strictly positive")]
    NotPositiveDefinite(f64),

    #[error("index order mismatch between eigen system and dipole family")]
    IndexMismatch,

    #[error("ratio must satisfy b > 1, got {0}")]
    InvalidRatio(String),

    #[error("series is too short for the requested check (need at least {need} terms)")]
    SeriesTooShort { need: usize },

    #[error("operation requires a half-line family, got {0}")]
    UnsupportedTopology(String),

    #[error("time parameter must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("truncation or exhaustion is too small: {0}")]
    TruncationTooSmall(String),

    #[error("test vector is not supported on the first exhaustion set")]
    UnsupportedTestVector,

    #[error("coefficient vector is not balanced: sum is {0}")]
    NotBalanced(f64),

    #[error("invalid exhaustion: {0}")]
    InvalidExhaustion(String),

    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
