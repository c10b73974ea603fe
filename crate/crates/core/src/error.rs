use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("time grid under-resolved: dt = {dt:.3e} s, need dt <= {required:.3e} s")]
    UnderResolved { dt: f64, required: f64 },

    #[error("mode functions share no common time window")]
    NoOverlapRegion,

    #[error("Fock truncation n_cut = {n_cut} is inadequate (neglected weight {tail:.3e}); use n_cut >= {suggested}")]
    Truncation { n_cut: usize, tail: f64, suggested: usize },

    #[error("photon subtraction from a state without photons")]
    ZeroNorm,

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("density matrices have different truncations ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("Wigner grid too coarse or too small: normalization defect {0:.3e}")]
    CoarseGrid(f64),

    #[error("search disk of radius {radius} is not contained in the grid")]
    SearchDiskOutsideGrid { radius: f64 },

    #[error("insufficient phase coverage: {0}")]
    PhaseCoverage(String),

    #[error("only unity-gain teleportation is supported (requested gain {0})")]
    NonUnityGain(f64),

    #[error("mode functions are orthogonal; the mode-matching parameter vanishes")]
    DegenerateOverlap,

    #[error("configuration error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
