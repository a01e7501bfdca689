use thiserror::Error;

use crate::svd::EigenTriple;

pub type Result<T> = std::result::Result<T, SsaError>;

#[derive(Debug, Error)]
pub enum SsaError {
    #[error("window length {window} out of range for series of length {len} (need 1 < L < N)")]
    WindowOutOfRange { window: usize, len: usize },

    #[error("series is too short: {len} samples, at least {min} required")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series contains missing samples")]
    MissingSamples,

    #[error("series has no present samples")]
    NoPresentSamples,

    #[error("non-finite sample at position {0}")]
    NonFinite(usize),

    #[error("mask length {mask} does not match series length {len}")]
    MaskLength { mask: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("requested {requested} components but at most {max} are available")]
    TooManyComponents { requested: usize, max: usize },

    #[error("truncated SVD did not converge after {restarts} restarts ({converged} of {requested} triples converged)")]
    NotConverged {
        restarts: usize,
        converged: usize,
        requested: usize,
        partial: Box<Vec<EigenTriple>>,
    },

    #[error("component index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("component {index} appears in groups '{first}' and '{second}'")]
    OverlappingGroups { index: usize, first: String, second: String },

    #[error("invalid group name '{0}'")]
    InvalidGroupName(String),

    #[error("unknown group '{0}'")]
    UnknownGroup(String),

    #[error("subspace is not forecastable: verticality coefficient nu^2 = {nu2}")]
    NotForecastable { nu2: f64 },

    #[error("subspace basis is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("shifted basis is rank deficient (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("unpaired complex root {re} + {im}i for a real-valued model")]
    UnpairedRoot { re: f64, im: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
