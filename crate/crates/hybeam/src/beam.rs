//! Array factors of MRC beams, their per-path decomposition, sidelobe
//! perturbation for target illumination, and the SNR penalty of the
//! perturbed beam.
//!
//! Convention: `AF(phi) = sum_n conj(beta_n) e^{j n pi cos(phi)}`, so a
//! matched beam `beta_n = e^{j n pi cos(theta0)}` reaches `|AF(theta0)| = N`.
//! Patterns are relative (no absolute dBi calibration).

use num_complex::Complex64;

use crate::channel::PathComponent;
use crate::error::{Error, Result};
use crate::frontend::BeamWeights;

/// Gain floor so exact pattern nulls stay finite in dB.
const DB_FLOOR_MAGNITUDE: f64 = 1e-12;

/// Far-field pattern sampled on an azimuth grid.
#[derive(Debug, Clone)]
pub struct FarfieldPattern {
    pub phi_deg: Vec<f64>,
    pub af: Vec<Complex64>,
    /// Relative gain `20 log10 |AF|`.
    pub gain_db: Vec<f64>,
}

impl FarfieldPattern {
    fn from_af(phi_deg: Vec<f64>, af: Vec<Complex64>) -> Self {
        let gain_db = af
            .iter()
            .map(|z| 20.0 * z.norm().max(DB_FLOOR_MAGNITUDE).log10())
            .collect();
        Self { phi_deg, af, gain_db }
    }

    /// Peak gain in dB over the grid.
    pub fn peak_gain_db(&self) -> f64 {
        self.gain_db.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Gain in dB at the grid point closest to `phi_deg`.
    pub fn gain_db_at(&self, phi_deg: f64) -> f64 {
        let idx = self
            .phi_deg
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - phi_deg).abs().partial_cmp(&(*b - phi_deg).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        self.gain_db[idx]
    }
}

/// Default azimuth grid for pattern exports: 0 to 180 degrees at 0.25.
pub fn default_phi_grid() -> Vec<f64> {
    (0..=720).map(|i| i as f64 * 0.25).collect()
}

/// Evaluate `AF(phi) = sum_n conj(beta_n) e^{j n pi cos(phi)}` on the grid.
pub fn array_factor(beta: &BeamWeights, phi_grid_deg: &[f64]) -> FarfieldPattern {
    assert!(!phi_grid_deg.is_empty(), "empty pattern grid");
    let af = phi_grid_deg
        .iter()
        .map(|phi| {
            let step = std::f64::consts::PI * phi.to_radians().cos();
            beta.weights()
                .iter()
                .enumerate()
                .map(|(n, b)| b.conj() * Complex64::from_polar(1.0, step * n as f64))
                .sum()
        })
        .collect();
    FarfieldPattern::from_af(phi_grid_deg.to_vec(), af)
}

/// MRC beam with an extra lobe: `beta'_n = xi e^{j n pi cos(varphi)} +
/// (1 - xi) beta_n`.
#[derive(Debug, Clone)]
pub struct PerturbedBeam {
    pub xi: f64,
    pub varphi_deg: f64,
    pub weights: BeamWeights,
}

/// Add a sidelobe of relative amplitude `xi` towards `varphi_deg`.
pub fn perturb_beam(beta: &BeamWeights, xi: f64, varphi_deg: f64) -> Result<PerturbedBeam> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::XiOutOfRange(xi));
    }
    let step = std::f64::consts::PI * varphi_deg.to_radians().cos();
    let weights: Vec<Complex64> = beta
        .weights()
        .iter()
        .enumerate()
        .map(|(n, b)| Complex64::from_polar(xi, step * n as f64) + b * (1.0 - xi))
        .collect();
    Ok(PerturbedBeam {
        xi,
        varphi_deg,
        weights: BeamWeights::new(weights, beta.frame_tag)?,
    })
}

/// Communication SNR penalty of the perturbed beam: `-20 log10(1 - xi)` dB.
pub fn snr_penalty_db(xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::XiOutOfRange(xi));
    }
    Ok(-20.0 * (1.0 - xi).log10())
}

/// MRC weights `beta_n = sum_k alpha_k e^{j n pi cos(theta_k)}` for known
/// path gains.
pub fn mrc_weights(paths: &[PathComponent], alphas: &[Complex64], n_antennas: usize) -> Result<BeamWeights> {
    if paths.len() != alphas.len() || paths.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} paths vs {} gains",
            paths.len(),
            alphas.len()
        )));
    }
    let beta: Vec<Complex64> = (0..n_antennas)
        .map(|ant| {
            paths
                .iter()
                .zip(alphas)
                .map(|(p, a)| a * Complex64::from_polar(1.0, p.phase_step() * ant as f64))
                .sum()
        })
        .collect();
    BeamWeights::new(beta, -1)
}

/// Decompose the MRC beam for `paths` with gains `alphas` into per-path
/// beams: `AF(phi) = sum_k conj(alpha_k) AF_k(phi)` with
/// `AF_k(phi) = sum_n e^{-j n pi cos(theta_k)} e^{j n pi cos(phi)}`, each a
/// beam pointed at `theta_k`.
///
/// Returns `(conj(alpha_k), AF_k)` per path after verifying that the linear
/// combination reproduces the total pattern on the grid.
pub fn mrc_beam_decomposition(
    paths: &[PathComponent],
    alphas: &[Complex64],
    n_antennas: usize,
    phi_grid_deg: &[f64],
) -> Result<Vec<(Complex64, FarfieldPattern)>> {
    let beam = mrc_weights(paths, alphas, n_antennas)?;
    let total = array_factor(&beam, phi_grid_deg);

    let terms: Vec<FarfieldPattern> = paths
        .iter()
        .map(|p| array_factor(&BeamWeights::matched(n_antennas, p.azimuth_rad), phi_grid_deg))
        .collect();

    let scale = total
        .af
        .iter()
        .map(|z| z.norm())
        .fold(f64::MIN_POSITIVE, f64::max);
    for idx in 0..phi_grid_deg.len() {
        let sum: Complex64 = alphas
            .iter()
            .zip(&terms)
            .map(|(a, t)| a.conj() * t.af[idx])
            .sum();
        let resid = (sum - total.af[idx]).norm();
        if resid > 1e-10 * scale {
            return Err(Error::InvalidInputs(format!(
                "beam decomposition residual {resid:.3e} at phi = {}",
                phi_grid_deg[idx]
            )));
        }
    }

    Ok(alphas
        .iter()
        .zip(terms)
        .map(|(a, t)| (a.conj(), t))
        .collect())
}
