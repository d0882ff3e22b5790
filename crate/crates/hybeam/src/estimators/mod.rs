//! Spectral estimators: 1-D MUSIC over the wideband analog estimate for
//! delays, Matrix Pencil for per-antenna spatial frequencies, and the
//! joint 2D-MUSIC baseline over fully digital front-ends.

mod music;
mod music2d;
mod pencil;

pub use music::{build_covariance, music_toa, signal_subspace_from_snapshots, SignalSubspace};
pub use music2d::{music_2d, Music2dConfig, Music2dPeak};
pub use pencil::{matrix_pencil, phase_step_to_angle};

use num_complex::Complex64;

/// Number of signal sources assumed by subspace splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceCount {
    /// Pick the split at the largest relative eigenvalue gap.
    Auto,
    /// Known source count.
    Fixed(usize),
}

/// How the covariance eigendecomposition is carried out.
///
/// `Full` decomposes the dim x dim sample covariance directly. `LowRank`
/// exploits that `R = Y Y^H` shares its nonzero eigenpairs with the small
/// Gram matrix `Y^H Y` when there are fewer snapshots than rows; the
/// resulting signal subspace is the same. `Auto` picks `LowRank` whenever
/// it is cheaper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceEig {
    #[default]
    Auto,
    Full,
    LowRank,
}

/// Uniform search grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points }
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.start + self.step() * idx as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

/// Configuration for 1-D MUSIC delay estimation.
#[derive(Debug, Clone)]
pub struct MusicConfig {
    pub n_sources: SourceCount,
    /// Delay search grid in seconds.
    pub grid: GridSpec,
    /// Peaks below `peak_min_prominence * max_peak` are dropped (0 keeps
    /// everything, ranking alone decides).
    pub peak_min_prominence: f64,
    /// Polish each grid peak by local bracket shrinking.
    pub refine: bool,
    pub eig_route: CovarianceEig,
}

impl Default for MusicConfig {
    fn default() -> Self {
        // 0..20 m path length at 1 cm steps.
        Self {
            n_sources: SourceCount::Auto,
            grid: GridSpec::new(0.0, 20.0 / crate::SPEED_OF_LIGHT, 2001),
            peak_min_prominence: 0.0,
            refine: true,
            eig_route: CovarianceEig::Auto,
        }
    }
}

/// MUSIC pseudospectrum on the delay grid.
#[derive(Debug, Clone)]
pub struct MusicSpectrum {
    pub taus_s: Vec<f64>,
    pub p_music: Vec<f64>,
}

/// Estimated delays, ascending and pairwise distinct.
#[derive(Debug, Clone)]
pub struct ToaEstimates {
    pub delays_s: Vec<f64>,
}

/// Per-antenna phase increments `phi_q` in (-pi, pi] recovered by the
/// Matrix Pencil; the spatial frequency is `omega = phi M / (2 pi)`.
#[derive(Debug, Clone)]
pub struct SpatialFrequencies {
    pub phase_steps: Vec<f64>,
}

/// Delay steering phasor sequence `a[r] = e^{-j 2 pi r df tau}`,
/// r = 0..len-1 over the subcarriers in natural order.
pub(crate) fn delay_steering(delta_f: f64, tau: f64, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|r| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * delta_f * tau * r as f64))
        .collect()
}

/// Angle steering phasor sequence `a[n] = e^{j n pi cos(theta)}`.
pub(crate) fn angle_steering(theta_rad: f64, len: usize) -> Vec<Complex64> {
    let step = std::f64::consts::PI * theta_rad.cos();
    (0..len)
        .map(|n| Complex64::from_polar(1.0, step * n as f64))
        .collect()
}
