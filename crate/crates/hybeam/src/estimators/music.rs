//! 1-D MUSIC delay estimation over the analog-beamformed channel estimate.

use num_complex::Complex64;

use super::{CovarianceEig, MusicConfig, MusicSpectrum, SourceCount, ToaEstimates};
use crate::error::{Error, Result};
use crate::frontend::AnalogEstimate;
use crate::linalg::{eig_hermitian, CMatrix};

/// Eigenvalues below `lambda_max * EIGENVALUE_FLOOR` are rank artifacts of
/// the snapshot-deficient covariance, not a noise floor.
const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Iterations of bracket shrinking when polishing a grid peak.
const REFINE_ITERS: usize = 14;
const REFINE_POINTS: usize = 9;

/// Sample covariance `R_y = Y Y^H`, where column `i` of `Y` is the frame-`i`
/// estimate over the subcarriers in natural order.
pub fn build_covariance(h_a: &AnalogEstimate) -> CMatrix {
    let dim = h_a.n_subcarriers();
    let mut r = CMatrix::zeros(dim, dim);
    for i in 0..h_a.n_frames {
        let col = h_a.frame(i);
        for p in 0..dim {
            let cp = col[p];
            for q in 0..dim {
                r[(p, q)] += cp * col[q].conj();
            }
        }
    }
    r
}

/// Signal subspace of a snapshot matrix: eigenvalues of `Y Y^H` (descending,
/// padded with zeros past the snapshot rank) and the leading eigenvectors.
#[derive(Debug, Clone)]
pub struct SignalSubspace {
    /// All available eigenvalues of the covariance, descending.
    pub eigenvalues: Vec<f64>,
    /// Leading (signal) eigenvectors, one `dim`-length vector per source.
    pub vectors: Vec<Vec<Complex64>>,
    pub dim: usize,
}

impl SignalSubspace {
    /// `||a||^2 - sum_k |v_k^H a|^2`, the squared distance from `a` to the
    /// signal subspace; the MUSIC denominator `a^H U_n U_n^H a`.
    pub fn noise_projection(&self, a: &[Complex64]) -> f64 {
        let norm2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let mut sig = 0.0;
        for v in &self.vectors {
            let mut dot = Complex64::ZERO;
            for (vi, ai) in v.iter().zip(a) {
                dot += vi.conj() * ai;
            }
            sig += dot.norm_sqr();
        }
        norm2 - sig
    }
}

/// Extract the `n_sources` leading eigenvectors of `Y Y^H` from snapshot
/// columns, choosing the full or Gram-reduced eigendecomposition.
///
/// `snapshots` holds the columns of `Y` (each of length `dim`).
pub fn signal_subspace_from_snapshots(
    snapshots: &[Vec<Complex64>],
    n_sources: usize,
    route: CovarianceEig,
) -> Result<SignalSubspace> {
    let dim = snapshots.first().map(|s| s.len()).unwrap_or(0);
    if dim == 0 || snapshots.is_empty() {
        return Err(Error::ShapeMismatch("empty snapshot matrix".into()));
    }
    let n_snap = snapshots.len();
    let low_rank = match route {
        CovarianceEig::Full => false,
        CovarianceEig::LowRank => true,
        CovarianceEig::Auto => n_snap < dim,
    };

    if low_rank {
        // Gram matrix G = Y^H Y shares the nonzero eigenvalues of Y Y^H;
        // an eigenvector w of G maps to the covariance eigenvector
        // Y w / ||Y w||.
        let mut g = CMatrix::zeros(n_snap, n_snap);
        for p in 0..n_snap {
            for q in p..n_snap {
                let mut dot = Complex64::ZERO;
                for (a, b) in snapshots[p].iter().zip(&snapshots[q]) {
                    dot += a.conj() * b;
                }
                g[(p, q)] = dot;
                g[(q, p)] = dot.conj();
            }
        }
        let dec = eig_hermitian(&g, 1e-8)?;
        let floor = dec.values.first().copied().unwrap_or(0.0) * EIGENVALUE_FLOOR;
        let usable = dec.values.iter().take_while(|&&l| l > floor).count();
        let take = n_sources.min(usable);

        let mut vectors = Vec::with_capacity(take);
        for k in 0..take {
            let mut v = vec![Complex64::ZERO; dim];
            for (i, snap) in snapshots.iter().enumerate() {
                let w = dec.vectors[(i, k)];
                for (out, s) in v.iter_mut().zip(snap) {
                    *out += s * w;
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                let inv = 1.0 / norm;
                for z in &mut v {
                    *z *= inv;
                }
            }
            vectors.push(v);
        }
        orthonormalize(&mut vectors);

        // The covariance has `dim` eigenvalues; the Gram pass yields the
        // nonzero ones, the rest are exact zeros.
        let mut eigenvalues = dec.values;
        eigenvalues.resize(dim, 0.0);
        Ok(SignalSubspace {
            eigenvalues,
            vectors,
            dim,
        })
    } else {
        let mut r = CMatrix::zeros(dim, dim);
        for snap in snapshots {
            for p in 0..dim {
                let cp = snap[p];
                for q in 0..dim {
                    r[(p, q)] += cp * snap[q].conj();
                }
            }
        }
        let dec = eig_hermitian(&r, 1e-8)?;
        let take = n_sources.min(dim.saturating_sub(1));
        let vectors = (0..take).map(|k| dec.vectors.col(k)).collect();
        Ok(SignalSubspace {
            eigenvalues: dec.values,
            vectors,
            dim,
        })
    }
}

/// In-place modified Gram-Schmidt; the inputs are already near-orthonormal.
fn orthonormalize(vectors: &mut [Vec<Complex64>]) {
    for k in 0..vectors.len() {
        for j in 0..k {
            let mut dot = Complex64::ZERO;
            for (a, b) in vectors[j].iter().zip(&vectors[k]) {
                dot += a.conj() * b;
            }
            let (head, tail) = vectors.split_at_mut(k);
            for (a, b) in head[j].iter().zip(&mut tail[0]) {
                *b -= a * dot;
            }
        }
        let norm: f64 = vectors[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for z in &mut vectors[k] {
                *z *= inv;
            }
        }
    }
}

/// Pick the source count at the largest relative eigenvalue gap.
pub(crate) fn auto_source_count(eigenvalues: &[f64]) -> usize {
    let lambda_max = eigenvalues.first().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return 1;
    }
    let floor = lambda_max * EIGENVALUE_FLOOR;
    let mut best_k = 1;
    let mut best_ratio = 0.0;
    for k in 1..eigenvalues.len() {
        let num = eigenvalues[k - 1];
        if num <= floor {
            break;
        }
        let den = eigenvalues[k].max(floor);
        let ratio = num / den;
        if ratio > best_ratio {
            best_ratio = ratio;
            best_k = k;
        }
    }
    best_k
}

/// 1-D MUSIC: covariance, subspace split, pseudospectrum over the delay
/// grid, and peak extraction.
///
/// Returns the estimated delays (ascending) plus the spectrum on the grid.
pub fn music_toa(
    h_a: &AnalogEstimate,
    cfg: &MusicConfig,
    delta_f: f64,
) -> Result<(ToaEstimates, MusicSpectrum)> {
    let dim = h_a.n_subcarriers();
    if cfg.grid.points < 2 || cfg.grid.stop <= cfg.grid.start {
        return Err(Error::InvalidInputs("bad delay grid".into()));
    }
    if let SourceCount::Fixed(k) = cfg.n_sources {
        if k == 0 || k >= dim {
            return Err(Error::InvalidInputs(format!(
                "n_sources = {k} outside [1, S-2]"
            )));
        }
    }

    let snapshots: Vec<Vec<Complex64>> = (0..h_a.n_frames).map(|i| h_a.frame(i).to_vec()).collect();
    // The subspace needs the requested source count up front; resolve Auto
    // from a cheap eigenvalue-only pass by requesting one vector first.
    let n_sources = match cfg.n_sources {
        SourceCount::Fixed(k) => k,
        SourceCount::Auto => {
            let probe = signal_subspace_from_snapshots(&snapshots, 1, cfg.eig_route)?;
            auto_source_count(&probe.eigenvalues)
        }
    };
    let subspace = signal_subspace_from_snapshots(&snapshots, n_sources, cfg.eig_route)?;

    // Pseudospectrum on the grid.
    let n_grid = cfg.grid.points;
    let taus = cfg.grid.values();
    let mut den = Vec::with_capacity(n_grid);
    for &tau in &taus {
        den.push(spectrum_denominator(&subspace, delta_f, tau));
    }
    let p_music: Vec<f64> = den.iter().map(|&d| 1.0 / d.max(1e-300)).collect();

    // Strict interior local maxima, ranked by height.
    let mut peaks: Vec<usize> = (1..n_grid - 1)
        .filter(|&i| p_music[i] > p_music[i - 1] && p_music[i] > p_music[i + 1])
        .collect();
    if peaks.is_empty() {
        return Err(Error::NoPeaksFound);
    }
    peaks.sort_by(|&a, &b| p_music[b].partial_cmp(&p_music[a]).unwrap());
    if cfg.peak_min_prominence > 0.0 {
        let max_p = p_music[peaks[0]];
        peaks.retain(|&i| p_music[i] >= cfg.peak_min_prominence * max_p);
    }
    peaks.truncate(n_sources);

    let step = cfg.grid.step();
    let mut delays: Vec<f64> = peaks
        .iter()
        .map(|&i| {
            if cfg.refine {
                refine_peak(&subspace, delta_f, taus[i], step)
            } else {
                taus[i]
            }
        })
        .collect();
    delays.sort_by(|a, b| a.partial_cmp(b).unwrap());
    delays.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * step);

    Ok((
        ToaEstimates { delays_s: delays },
        MusicSpectrum { taus_s: taus, p_music },
    ))
}

/// MUSIC denominator at a single delay, via the phasor recurrence
/// `a[r+1] = a[r] w` with `w = e^{-j 2 pi df tau}`.
fn spectrum_denominator(subspace: &SignalSubspace, delta_f: f64, tau: f64) -> f64 {
    let dim = subspace.dim;
    let w = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * delta_f * tau);
    let mut a = Complex64::ONE;
    let mut norm2 = 0.0;
    let mut dots = vec![Complex64::ZERO; subspace.vectors.len()];
    for r in 0..dim {
        norm2 += a.norm_sqr();
        for (dot, v) in dots.iter_mut().zip(&subspace.vectors) {
            *dot += v[r].conj() * a;
        }
        a *= w;
    }
    let sig: f64 = dots.iter().map(|d| d.norm_sqr()).sum();
    norm2 - sig
}

/// Shrink a bracket of one grid step around the peak to locate the spectrum
/// maximum (denominator minimum) off-grid.
fn refine_peak(subspace: &SignalSubspace, delta_f: f64, center: f64, step: f64) -> f64 {
    let mut lo = center - step;
    let mut hi = center + step;
    let mut best = center;
    for _ in 0..REFINE_ITERS {
        let mut best_den = f64::INFINITY;
        for i in 0..REFINE_POINTS {
            let tau = lo + (hi - lo) * i as f64 / (REFINE_POINTS - 1) as f64;
            let d = spectrum_denominator(subspace, delta_f, tau);
            if d < best_den {
                best_den = d;
                best = tau;
            }
        }
        let width = (hi - lo) / 4.0;
        lo = best - width * 0.5;
        hi = best + width * 0.5;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{
        draw_frame_gains, synthesize_cfr, FrameGains, MultipathChannel, PathComponent,
    };
    use crate::frontend::{analog_estimate, BeamWeights};
    use crate::SPEED_OF_LIGHT;

    fn analog_for(
        paths: Vec<PathComponent>,
        s: usize,
        f: usize,
        seed: u64,
        sigma: f64,
    ) -> (AnalogEstimate, f64) {
        let ch = MultipathChannel::new(paths, 1, s, 3.125e6, f).unwrap();
        let gains = draw_frame_gains(&ch, seed);
        let cfr = synthesize_cfr(&ch, &gains).unwrap();
        let est = analog_estimate(&cfr, &[BeamWeights::uniform(1)], sigma, seed ^ 0xabcd).unwrap();
        (est, ch.subcarrier_spacing)
    }

    #[test]
    fn covariance_rank_one_outer_product_and_trace() {
        let est = AnalogEstimate::from_rows(1, -2, 2, vec![Complex64::ONE; 5]).unwrap();
        let r = build_covariance(&est);
        for p in 0..5 {
            for q in 0..5 {
                assert_eq!(r[(p, q)], Complex64::ONE);
            }
        }

        let (est, _) = analog_for(
            vec![PathComponent::from_range_angle(9.0, 60.0)],
            32,
            4,
            3,
            0.5,
        );
        let r = build_covariance(&est);
        let trace: f64 = (0..r.rows()).map(|i| r[(i, i)].re).sum();
        let energy: f64 = est.as_slice().iter().map(|z| z.norm_sqr()).sum();
        assert!((trace - energy).abs() < 1e-9 * energy);
        assert!(r.max_asymmetry() < 1e-12 * r.frobenius_norm());
    }

    #[test]
    fn music_finds_single_on_grid_path() {
        let range = 10.0;
        let tau = range / SPEED_OF_LIGHT;
        let (est, df) = analog_for(
            vec![PathComponent::from_range_angle(range, 90.0)],
            128,
            10,
            5,
            0.0,
        );
        let cfg = MusicConfig {
            n_sources: SourceCount::Fixed(1),
            ..MusicConfig::default()
        };
        let (toas, spectrum) = music_toa(&est, &cfg, df).unwrap();
        assert_eq!(toas.delays_s.len(), 1);
        assert!(
            (toas.delays_s[0] - tau).abs() < cfg.grid.step(),
            "peak at {} vs true {}",
            toas.delays_s[0],
            tau
        );
        assert!(spectrum.p_music.iter().all(|&p| p > 0.0 && p.is_finite()));
    }

    #[test]
    fn music_resolves_two_paths() {
        let (est, df) = analog_for(
            vec![
                PathComponent::from_range_angle(10.0, 90.0),
                PathComponent::from_range_angle(14.0, 90.0),
            ],
            128,
            10,
            6,
            0.0,
        );
        let cfg = MusicConfig {
            n_sources: SourceCount::Fixed(2),
            ..MusicConfig::default()
        };
        let (toas, _) = music_toa(&est, &cfg, df).unwrap();
        assert_eq!(toas.delays_s.len(), 2);
        let t0 = 10.0 / SPEED_OF_LIGHT;
        let t1 = 14.0 / SPEED_OF_LIGHT;
        assert!((toas.delays_s[0] - t0).abs() < cfg.grid.step());
        assert!((toas.delays_s[1] - t1).abs() < cfg.grid.step());
    }

    #[test]
    fn noiseless_orthogonality_gap_exceeds_20db() {
        let range = 10.0;
        let (est, df) = analog_for(
            vec![PathComponent::from_range_angle(range, 90.0)],
            128,
            10,
            7,
            0.0,
        );
        let cfg = MusicConfig {
            n_sources: SourceCount::Fixed(1),
            refine: false,
            ..MusicConfig::default()
        };
        let (_, spectrum) = music_toa(&est, &cfg, df).unwrap();
        let peak_idx = spectrum
            .p_music
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let away = peak_idx + 5;
        let gap_db = 10.0 * (spectrum.p_music[peak_idx] / spectrum.p_music[away]).log10();
        assert!(gap_db >= 20.0, "orthogonality gap only {gap_db:.1} dB");
    }

    #[test]
    fn spectrum_invariant_to_global_phase() {
        let (est, df) = analog_for(
            vec![PathComponent::from_range_angle(11.0, 90.0)],
            64,
            8,
            9,
            0.1,
        );
        let cfg = MusicConfig {
            n_sources: SourceCount::Fixed(1),
            ..MusicConfig::default()
        };
        let (_, s1) = music_toa(&est, &cfg, df).unwrap();
        let rotated = est.scaled(Complex64::i());
        let (_, s2) = music_toa(&rotated, &cfg, df).unwrap();
        for (a, b) in s1.p_music.iter().zip(&s2.p_music) {
            assert_eq!(a, b, "rotation by i must be exact");
        }
    }

    #[test]
    fn low_rank_and_full_routes_agree() {
        let (est, df) = analog_for(
            vec![
                PathComponent::from_range_angle(8.0, 90.0),
                PathComponent::from_range_angle(12.5, 90.0),
            ],
            48,
            6,
            11,
            0.2,
        );
        let mk = |route| MusicConfig {
            n_sources: SourceCount::Fixed(2),
            eig_route: route,
            ..MusicConfig::default()
        };
        let (t_full, s_full) = music_toa(&est, &mk(CovarianceEig::Full), df).unwrap();
        let (t_low, s_low) = music_toa(&est, &mk(CovarianceEig::LowRank), df).unwrap();
        assert_eq!(t_full.delays_s.len(), t_low.delays_s.len());
        for (a, b) in t_full.delays_s.iter().zip(&t_low.delays_s) {
            assert!((a - b).abs() < 1e-13, "delays {a} vs {b}");
        }
        for (a, b) in s_full.p_music.iter().zip(&s_low.p_music) {
            let rel = (a - b).abs() / a.max(*b);
            assert!(rel < 1e-6, "spectrum mismatch {a} vs {b}");
        }
    }

    #[test]
    fn auto_count_prefers_real_gap() {
        // Two strong eigenvalues over a noise tail.
        let eigs = [10.0, 8.0, 0.05, 0.04, 0.03, 0.02];
        assert_eq!(auto_source_count(&eigs), 2);
        // Rank edge of a noiseless covariance.
        let eigs = [5.0, 1e-18, 1e-19, 0.0];
        assert_eq!(auto_source_count(&eigs), 1);
    }

    #[test]
    fn refinement_beats_grid_quantization() {
        // Off-grid target: refinement should land well inside one step.
        let range = 10.0037;
        let tau = range / SPEED_OF_LIGHT;
        let (est, df) = analog_for(
            vec![PathComponent::from_range_angle(range, 90.0)],
            128,
            10,
            13,
            0.0,
        );
        let cfg = MusicConfig {
            n_sources: SourceCount::Fixed(1),
            ..MusicConfig::default()
        };
        let (toas, _) = music_toa(&est, &cfg, df).unwrap();
        let err_m = (toas.delays_s[0] - tau).abs() * SPEED_OF_LIGHT;
        assert!(err_m < 1e-6, "refined error {err_m} m");
    }

    #[test]
    fn all_zero_input_reports_no_peaks() {
        let est = AnalogEstimate::from_rows(2, -8, 8, vec![Complex64::ZERO; 34]).unwrap();
        let cfg = MusicConfig::default();
        match music_toa(&est, &cfg, 3.125e6) {
            Err(Error::NoPeaksFound) => {}
            other => panic!("expected NoPeaksFound, got {other:?}"),
        }
    }
}
