//! Simulation and estimation library for joint communication-and-sensing
//! with a hybrid beamforming receiver.
//!
//! The receiver model combines a wideband analog beamforming chain (one
//! high-rate ADC behind a phase-shift-and-sum network) with a narrowband
//! fully-digital chain (per-antenna RF chains multiplexed into a second
//! ADC). Time of arrival is estimated from the wideband analog channel
//! estimate with 1-D MUSIC; each detected delay is then amplified in the
//! narrowband digital domain by non-coherent maximum-ratio combining over
//! frames, and its angle of arrival is extracted with the Matrix Pencil
//! method. A joint 2D-MUSIC estimator over fully digital front-ends serves
//! as the comparison baseline.
//!
//! Modules:
//! - [`linalg`]: dense complex linear algebra (Hermitian eigen, SVD,
//!   pseudoinverse, pencil eigenvalues) used by the estimators.
//! - [`channel`]: multipath channel ground truth and CFR synthesis.
//! - [`frontend`]: the hybrid receiver model and reference front-ends.
//! - [`estimators`]: 1-D MUSIC, Matrix Pencil, 2D-MUSIC.
//! - [`pipeline`]: the end-to-end ToA -> amplification -> AoA algorithm.
//! - [`beam`]: array factors, MRC beam decomposition, perturbed beams.
//! - [`experiments`]: Monte Carlo evaluation protocol, theoretical
//!   resolution formulas, and CSV report emission.

pub mod beam;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod frontend;
pub mod linalg;
pub mod pipeline;

pub use error::{Error, Result};

/// Speed of light in m/s, used to convert path lengths to delays.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
