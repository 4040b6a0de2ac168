use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty operator")]
    Empty,

    #[error("dimension {0} is not a power of two")]
    NotQubitRegister(usize),

    #[error("site {site} out of range 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("operator is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),

    #[error("excitation count {k} out of range 0..={n}")]
    ExcitationOutOfRange { k: usize, n: usize },

    #[error("operator does not conserve excitation number (max |[N, A]| = {deviation:e})")]
    NotNumberConserving { deviation: f64 },

    #[error("integrator step size underflow at t = {time}")]
    StepUnderflow { time: f64 },

    #[error("superoperator for dim {dim} exceeds the dense limit of {limit}")]
    SuperoperatorTooLarge { dim: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed config: {0}")]
    Config(#[from] serde_json::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
