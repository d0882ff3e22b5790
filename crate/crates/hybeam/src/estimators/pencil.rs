//! Matrix Pencil spatial-frequency estimation from one combined channel
//! vector across the array.

use num_complex::Complex64;

use super::SpatialFrequencies;
use crate::error::{Error, Result};
use crate::linalg::{pencil_generalized_eigs, CMatrix};

/// Extract per-antenna phase steps from `h_vec` with pencil parameter `P`.
///
/// A Hankel matrix with rows 0..M-P-1 and columns 0..P-1 is split into the
/// pencil pair by dropping its last and first column; the significant
/// generalized eigenvalues (rank decided by `rank_tol` on the singular
/// values of the first pair member) carry the phase steps as their angles.
pub fn matrix_pencil(
    h_vec: &[Complex64],
    pencil_p: usize,
    rank_tol: f64,
) -> Result<SpatialFrequencies> {
    let m = h_vec.len();
    if pencil_p < 1 || pencil_p >= m {
        return Err(Error::InvalidInputs(format!(
            "pencil parameter {pencil_p} outside [1, {})",
            m
        )));
    }
    if pencil_p < 2 {
        return Err(Error::DegeneratePencil(
            "pencil parameter below 2 leaves an empty pair",
        ));
    }
    let rows = m - pencil_p;
    let h1 = CMatrix::from_fn(rows, pencil_p - 1, |r, c| h_vec[r + c]);
    let h2 = CMatrix::from_fn(rows, pencil_p - 1, |r, c| h_vec[r + c + 1]);
    let eigs = pencil_generalized_eigs(&h1, &h2, rank_tol)?;
    Ok(SpatialFrequencies {
        phase_steps: eigs.values.iter().map(|z| z.arg()).collect(),
    })
}

/// Convert a per-antenna phase step to an azimuth in degrees:
/// `theta = arccos(phi / pi)`.
pub fn phase_step_to_angle(phi: f64) -> f64 {
    let cos_theta = (phi / std::f64::consts::PI).clamp(-1.0, 1.0);
    cos_theta.acos().to_degrees()
}
