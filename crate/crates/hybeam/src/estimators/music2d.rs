//! Joint delay-angle 2D-MUSIC over a fully digital front-end, the
//! high-complexity baseline the sequential pipeline is compared against.

use num_complex::Complex64;

use super::music::signal_subspace_from_snapshots;
use super::music::SignalSubspace;
use super::{angle_steering, delay_steering, CovarianceEig, GridSpec};
use crate::channel::CfrTensor;
use crate::error::{Error, Result};

/// Search grids and options for the 2-D spectrum.
#[derive(Debug, Clone)]
pub struct Music2dConfig {
    /// Delay grid in seconds.
    pub tau_grid: GridSpec,
    /// Angle grid in degrees.
    pub theta_grid_deg: GridSpec,
    pub eig_route: CovarianceEig,
    pub refine: bool,
}

impl Default for Music2dConfig {
    fn default() -> Self {
        Self {
            tau_grid: GridSpec::new(0.0, 20.0 / crate::SPEED_OF_LIGHT, 2001),
            theta_grid_deg: GridSpec::new(0.0, 180.0, 1801),
            eig_route: CovarianceEig::Full,
            refine: true,
        }
    }
}

/// One detected (delay, angle) pair with its pseudospectrum height.
#[derive(Debug, Clone)]
pub struct Music2dPeak {
    pub delay_s: f64,
    pub angle_deg: f64,
    pub p_music: f64,
}

/// 2D-MUSIC with `k_true` assumed sources over the Kronecker steering
/// `a(tau) (x) a(theta)`.
///
/// Per-frame snapshots are the vectorized antenna-by-subcarrier estimates;
/// forward-backward averaging repairs the snapshot-deficient covariance.
/// Returns up to `k_true` largest distinct peaks, best first.
pub fn music_2d(
    tensor: &CfrTensor,
    delta_f: f64,
    k_true: usize,
    cfg: &Music2dConfig,
) -> Result<Vec<Music2dPeak>> {
    if k_true == 0 {
        return Err(Error::InvalidInputs("k_true must be at least 1".into()));
    }
    if cfg.tau_grid.points < 3 || cfg.theta_grid_deg.points < 1 {
        return Err(Error::InvalidInputs("bad 2-D search grid".into()));
    }
    let n_ant = tensor.n_antennas;
    let n_sub = tensor.n_subcarriers();
    let dim = n_ant * n_sub;

    // Stacked snapshots, subcarrier-major: y[r * N + n] = H_n(i, s_min + r),
    // plus the conjugate-reversed copies for forward-backward averaging.
    let mut snapshots = Vec::with_capacity(2 * tensor.n_frames);
    for i in 0..tensor.n_frames {
        let mut y = Vec::with_capacity(dim);
        for r in 0..n_sub {
            for n in 0..n_ant {
                y.push(tensor.get(n, i, tensor.s_min + r as i64));
            }
        }
        snapshots.push(y);
    }
    for i in 0..tensor.n_frames {
        let fwd = &snapshots[i];
        let rev: Vec<Complex64> = (0..dim).map(|idx| fwd[dim - 1 - idx].conj()).collect();
        snapshots.push(rev);
    }

    let subspace = signal_subspace_from_snapshots(&snapshots, k_true, cfg.eig_route)?;

    // Reshape each signal eigenvector to an (n_sub x n_ant) matrix so the
    // Kronecker steering factors through two short dot products.
    let k_vec = subspace.vectors.len();
    let taus = cfg.tau_grid.values();
    let thetas = cfg.theta_grid_deg.values();
    let theta_steer: Vec<Vec<Complex64>> = thetas
        .iter()
        .map(|t| angle_steering(t.to_radians(), n_ant))
        .collect();
    let theta_norm2: Vec<f64> = theta_steer
        .iter()
        .map(|a| a.iter().map(|z| z.norm_sqr()).sum())
        .collect();

    let n_tau = taus.len();
    let n_theta = thetas.len();
    let mut den = vec![0.0f64; n_tau * n_theta];
    let mut g = vec![Complex64::ZERO; k_vec * n_ant];
    for (it, &tau) in taus.iter().enumerate() {
        let a_tau = delay_steering(delta_f, tau, n_sub);
        let tau_norm2: f64 = a_tau.iter().map(|z| z.norm_sqr()).sum();
        g.fill(Complex64::ZERO);
        for (k, vec) in subspace.vectors.iter().enumerate() {
            let gk = &mut g[k * n_ant..(k + 1) * n_ant];
            for (r, &ar) in a_tau.iter().enumerate() {
                let row = &vec[r * n_ant..(r + 1) * n_ant];
                for (out, &v) in gk.iter_mut().zip(row) {
                    *out += v.conj() * ar;
                }
            }
        }
        for (jt, steer) in theta_steer.iter().enumerate() {
            let mut sig = 0.0;
            for k in 0..k_vec {
                let gk = &g[k * n_ant..(k + 1) * n_ant];
                let mut dot = Complex64::ZERO;
                for (gv, &sv) in gk.iter().zip(steer) {
                    dot += gv * sv;
                }
                sig += dot.norm_sqr();
            }
            den[it * n_theta + jt] = tau_norm2 * theta_norm2[jt] - sig;
        }
    }

    // Local minima of the denominator over the 8-neighborhood. Plateaus
    // (exact ties, e.g. a single-antenna tensor that is flat in angle)
    // report their first cell only.
    let mut peaks: Vec<(usize, usize)> = Vec::new();
    for it in 0..n_tau {
        'cell: for jt in 0..n_theta {
            let c = den[it * n_theta + jt];
            let c_idx = it * n_theta + jt;
            if it == 0 || it + 1 == n_tau {
                continue;
            }
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = it as i64 + di;
                    let nj = jt as i64 + dj;
                    if ni < 0 || ni >= n_tau as i64 || nj < 0 || nj >= n_theta as i64 {
                        continue;
                    }
                    let n_idx = ni as usize * n_theta + nj as usize;
                    let nv = den[n_idx];
                    if nv < c || (nv == c && n_idx < c_idx) {
                        continue 'cell;
                    }
                }
            }
            peaks.push((it, jt));
        }
    }
    if peaks.is_empty() {
        return Err(Error::NoPeaksFound);
    }
    peaks.sort_by(|&(ai, aj), &(bi, bj)| {
        den[ai * n_theta + aj]
            .partial_cmp(&den[bi * n_theta + bj])
            .unwrap()
    });
    peaks.truncate(k_true);

    let mut out = Vec::with_capacity(peaks.len());
    for &(it, jt) in &peaks {
        let (tau, theta, d) = if cfg.refine {
            refine_peak_2d(
                &subspace,
                delta_f,
                n_sub,
                n_ant,
                taus[it],
                cfg.tau_grid.step(),
                thetas[jt],
                cfg.theta_grid_deg.step(),
                &cfg.theta_grid_deg,
            )
        } else {
            (taus[it], thetas[jt], den[it * n_theta + jt])
        };
        out.push(Music2dPeak {
            delay_s: tau,
            angle_deg: theta,
            p_music: 1.0 / d.max(1e-300),
        });
    }

    // Distinctness contract on the returned set.
    for a in 0..out.len() {
        for b in a + 1..out.len() {
            let same_tau =
                (out[a].delay_s - out[b].delay_s).abs() < 1e-6 * cfg.tau_grid.step().max(1e-300);
            let same_theta = (out[a].angle_deg - out[b].angle_deg).abs()
                < 1e-6 * cfg.theta_grid_deg.step().max(1e-300);
            if same_tau && same_theta {
                return Err(Error::GridTooCoarse);
            }
        }
    }
    Ok(out)
}

/// Denominator at a single (tau, theta) point.
fn denominator_at(
    subspace: &SignalSubspace,
    delta_f: f64,
    n_sub: usize,
    n_ant: usize,
    tau: f64,
    theta_deg: f64,
) -> f64 {
    let a_tau = delay_steering(delta_f, tau, n_sub);
    let a_theta = angle_steering(theta_deg.to_radians(), n_ant);
    let norm2: f64 = a_tau.iter().map(|z| z.norm_sqr()).sum::<f64>()
        * a_theta.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let mut sig = 0.0;
    for vec in &subspace.vectors {
        let mut dot = Complex64::ZERO;
        for (r, &ar) in a_tau.iter().enumerate() {
            let row = &vec[r * n_ant..(r + 1) * n_ant];
            let mut inner = Complex64::ZERO;
            for (&v, &sv) in row.iter().zip(&a_theta) {
                inner += v.conj() * sv;
            }
            dot += inner * ar;
        }
        sig += dot.norm_sqr();
    }
    norm2 - sig
}

/// Shrink a +-1 grid-cell bracket around a 2-D peak.
#[allow(clippy::too_many_arguments)]
fn refine_peak_2d(
    subspace: &SignalSubspace,
    delta_f: f64,
    n_sub: usize,
    n_ant: usize,
    tau0: f64,
    tau_step: f64,
    theta0: f64,
    theta_step: f64,
    theta_grid: &GridSpec,
) -> (f64, f64, f64) {
    let mut tau_w = tau_step;
    let mut theta_w = theta_step;
    let mut best = (tau0, theta0);
    let mut best_den = f64::INFINITY;
    for _ in 0..12 {
        let (ct, cth) = best;
        for i in -2i64..=2 {
            for j in -2i64..=2 {
                let tau = ct + tau_w * i as f64 * 0.5;
                let theta =
                    (cth + theta_w * j as f64 * 0.5).clamp(theta_grid.start, theta_grid.stop);
                let d = denominator_at(subspace, delta_f, n_sub, n_ant, tau, theta);
                if d < best_den {
                    best_den = d;
                    best = (tau, theta);
                }
            }
        }
        tau_w /= 3.0;
        theta_w /= 3.0;
    }
    (best.0, best.1, best_den)
}
