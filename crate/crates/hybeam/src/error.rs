//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the simulation and estimation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that was required to be Hermitian failed the symmetry check.
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e}")]
    NonHermitian { asymmetry: f64, tol: f64 },

    /// An iterative solver exhausted its iteration budget.
    #[error("{routine} did not converge within {sweeps} sweeps")]
    NoConvergence { routine: &'static str, sweeps: usize },

    /// A matrix contained NaN or infinite entries.
    #[error("non-finite entry in input matrix")]
    NonFiniteInput,

    /// The pencil matrix is numerically zero or too small to form a pencil.
    #[error("degenerate matrix pencil: {0}")]
    DegeneratePencil(&'static str),

    /// SNR values must be strictly positive in linear scale.
    #[error("SNR must be positive, got {0}")]
    NonPositiveSnr(f64),

    /// Mismatched tensor/vector dimensions.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Antenna subset is invalid (out of range, duplicated, or wrong size).
    #[error("bad antenna set: {0}")]
    BadAntennaSet(String),

    /// The narrowband estimate does not contain the DC subcarrier.
    #[error("digital estimate has no DC subcarrier")]
    MissingDcSubcarrier,

    /// Peak detection found no local maxima on the spectrum grid.
    #[error("no peaks found on the spectrum grid")]
    NoPeaksFound,

    /// Two requested spectrum peaks fell into the same grid cell.
    #[error("grid too coarse: two peaks coincide")]
    GridTooCoarse,

    /// Beam perturbation weight must lie strictly inside (0, 1).
    #[error("perturbation weight xi={0} outside (0, 1)")]
    XiOutOfRange(f64),

    /// Beam weights must not be identically zero.
    #[error("beam weights are all zero")]
    ZeroBeam,

    /// Inputs to a closed-form expression violate its domain.
    #[error("invalid inputs: {0}")]
    InvalidInputs(String),
}

pub type Result<T> = std::result::Result<T, Error>;
