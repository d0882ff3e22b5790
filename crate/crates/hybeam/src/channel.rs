//! Ground-truth multipath channel and per-antenna baseband CFR synthesis.
//!
//! The channel is a sum of plane waves hitting a half-wavelength ULA. Path
//! geometry (delay, azimuth) is fixed across the frames of one acquisition;
//! the complex gains are redrawn independently per frame (non-coherent
//! frames). The CFR on antenna `n`, frame `i`, subcarrier `s` is
//!
//! ```text
//! H_n(i, s df) = sum_k alpha_{k,i} e^{j n pi cos(theta_k)} e^{-j 2 pi s df tau_k}
//! ```
//!
//! over the usable subcarrier set `s in {-ceil(S/2)+1, ..., floor(S/2)-1}`
//! (S - 1 subcarriers; the index -S/2 is a null subcarrier and the DC
//! subcarrier s = 0 is kept).

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// One propagation path: delay, azimuth, and relative average power.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComponent {
    /// Propagation delay in seconds.
    pub delay_s: f64,
    /// Azimuth angle of arrival in radians, within (0, pi).
    pub azimuth_rad: f64,
    /// Relative average power of the per-frame complex gain (default 1).
    pub gain_scale: f64,
}

impl PathComponent {
    pub fn new(delay_s: f64, azimuth_rad: f64) -> Self {
        Self {
            delay_s,
            azimuth_rad,
            gain_scale: 1.0,
        }
    }

    /// Path described by its length in meters and azimuth in degrees.
    pub fn from_range_angle(range_m: f64, angle_deg: f64) -> Self {
        Self::new(range_m / crate::SPEED_OF_LIGHT, angle_deg.to_radians())
    }

    /// Per-antenna phase step `pi cos(theta)` of this path on the ULA.
    pub fn phase_step(&self) -> f64 {
        std::f64::consts::PI * self.azimuth_rad.cos()
    }
}

/// Scene and sampling geometry for one acquisition.
#[derive(Debug, Clone)]
pub struct MultipathChannel {
    pub paths: Vec<PathComponent>,
    /// Number of ULA antennas N.
    pub n_antennas: usize,
    /// OFDM size S; the usable subcarrier count is S - 1.
    pub n_subcarriers: usize,
    /// Subcarrier spacing in Hz.
    pub subcarrier_spacing: f64,
    /// Number of non-coherent frames F.
    pub n_frames: usize,
}

impl MultipathChannel {
    pub fn new(
        paths: Vec<PathComponent>,
        n_antennas: usize,
        n_subcarriers: usize,
        subcarrier_spacing: f64,
        n_frames: usize,
    ) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidInputs("path list is empty".into()));
        }
        if n_antennas < 1 || n_subcarriers < 2 || n_frames < 1 {
            return Err(Error::InvalidInputs(format!(
                "need N >= 1, S >= 2, F >= 1; got N={n_antennas}, S={n_subcarriers}, F={n_frames}"
            )));
        }
        Ok(Self {
            paths,
            n_antennas,
            n_subcarriers,
            subcarrier_spacing,
            n_frames,
        })
    }

    /// Total bandwidth `S * df`.
    pub fn bandwidth(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }
}

/// Usable subcarrier index range for an OFDM size of `s` subcarriers:
/// `{-ceil(s/2)+1, ..., floor(s/2)-1}`.
pub fn subcarrier_range(s: usize) -> (i64, i64) {
    let s = s as i64;
    (-(s + 1) / 2 + 1, s / 2 - 1)
}

/// Per-frame complex path gains, one row per path.
#[derive(Debug, Clone)]
pub struct FrameGains {
    n_paths: usize,
    n_frames: usize,
    alpha: Vec<Complex64>,
}

impl FrameGains {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn get(&self, path: usize, frame: usize) -> Complex64 {
        self.alpha[path * self.n_frames + frame]
    }

    /// Build from explicit per-path, per-frame gains (row-major, path major).
    pub fn from_rows(n_paths: usize, n_frames: usize, alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != n_paths * n_frames {
            return Err(Error::ShapeMismatch(format!(
                "gains need {} entries, got {}",
                n_paths * n_frames,
                alpha.len()
            )));
        }
        Ok(Self {
            n_paths,
            n_frames,
            alpha,
        })
    }
}

/// Baseband CFR samples indexed by (antenna, frame, subcarrier).
#[derive(Debug, Clone, PartialEq)]
pub struct CfrTensor {
    pub n_antennas: usize,
    pub n_frames: usize,
    /// Lowest usable subcarrier index (inclusive).
    pub s_min: i64,
    /// Highest usable subcarrier index (inclusive).
    pub s_max: i64,
    data: Vec<Complex64>,
}

impl CfrTensor {
    pub fn zeros(n_antennas: usize, n_frames: usize, s_min: i64, s_max: i64) -> Self {
        let n_sub = (s_max - s_min + 1) as usize;
        Self {
            n_antennas,
            n_frames,
            s_min,
            s_max,
            data: vec![Complex64::ZERO; n_antennas * n_frames * n_sub],
        }
    }

    /// Number of usable subcarriers.
    pub fn n_subcarriers(&self) -> usize {
        (self.s_max - self.s_min + 1) as usize
    }

    pub fn get(&self, antenna: usize, frame: usize, s: i64) -> Complex64 {
        self.data[self.offset(antenna, frame, s)]
    }

    pub fn set(&mut self, antenna: usize, frame: usize, s: i64, value: Complex64) {
        let idx = self.offset(antenna, frame, s);
        self.data[idx] = value;
    }

    fn offset(&self, antenna: usize, frame: usize, s: i64) -> usize {
        debug_assert!(antenna < self.n_antennas && frame < self.n_frames);
        debug_assert!(s >= self.s_min && s <= self.s_max);
        (antenna * self.n_frames + frame) * self.n_subcarriers() + (s - self.s_min) as usize
    }

    /// Subcarrier indices in natural (ascending) order.
    pub fn subcarriers(&self) -> impl Iterator<Item = i64> + '_ {
        self.s_min..=self.s_max
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

/// Draw i.i.d. circularly-symmetric complex Gaussian gains, one per path and
/// frame, with per-path variance `gain_scale`. Deterministic given the seed.
pub fn draw_frame_gains(channel: &MultipathChannel, rng_seed: u64) -> FrameGains {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = channel.n_paths();
    let f = channel.n_frames;
    let mut alpha = Vec::with_capacity(k * f);
    for path in &channel.paths {
        // Total variance gain_scale: each quadrature carries half.
        let sd = (path.gain_scale * 0.5).sqrt();
        for _ in 0..f {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            alpha.push(Complex64::new(re * sd, im * sd));
        }
    }
    FrameGains {
        n_paths: k,
        n_frames: f,
        alpha,
    }
}

/// Evaluate the CFR formula exactly at every (antenna, frame, subcarrier).
pub fn synthesize_cfr(channel: &MultipathChannel, gains: &FrameGains) -> Result<CfrTensor> {
    if gains.n_paths() != channel.n_paths() || gains.n_frames() != channel.n_frames {
        return Err(Error::ShapeMismatch(format!(
            "gains are {}x{}, channel wants {}x{}",
            gains.n_paths(),
            gains.n_frames(),
            channel.n_paths(),
            channel.n_frames
        )));
    }
    let (s_min, s_max) = subcarrier_range(channel.n_subcarriers);
    let n_sub = (s_max - s_min + 1) as usize;
    let mut out = CfrTensor::zeros(channel.n_antennas, channel.n_frames, s_min, s_max);

    // Per-path phase ramps over antennas and subcarriers; both are geometric
    // sequences, evaluated by direct polar form for accuracy.
    for (k, path) in channel.paths.iter().enumerate() {
        let ant_phase = path.phase_step();
        let antenna_factors: Vec<Complex64> = (0..channel.n_antennas)
            .map(|n| Complex64::from_polar(1.0, ant_phase * n as f64))
            .collect();
        let delay_angle = -2.0 * std::f64::consts::PI * channel.subcarrier_spacing * path.delay_s;
        let subcarrier_factors: Vec<Complex64> = (0..n_sub)
            .map(|r| Complex64::from_polar(1.0, delay_angle * (s_min + r as i64) as f64))
            .collect();

        for n in 0..channel.n_antennas {
            for i in 0..channel.n_frames {
                let coeff = gains.get(k, i) * antenna_factors[n];
                let base = (n * channel.n_frames + i) * n_sub;
                let row = &mut out.data[base..base + n_sub];
                for (h, &sub) in row.iter_mut().zip(&subcarrier_factors) {
                    *h += coeff * sub;
                }
            }
        }
    }
    Ok(out)
}

/// Noise standard deviation giving the requested per-antenna linear SNR:
/// `sigma^2 = E[|H_n|^2] / snr` with `E[|H_n|^2] = sum_k gain_scale_k`.
pub fn noise_sigma_for_snr(channel: &MultipathChannel, snr_linear: f64) -> Result<f64> {
    if !(snr_linear > 0.0) {
        return Err(Error::NonPositiveSnr(snr_linear));
    }
    let power: f64 = channel.paths.iter().map(|p| p.gain_scale).sum();
    Ok((power / snr_linear).sqrt())
}

/// Add i.i.d. circularly-symmetric complex Gaussian noise of per-entry
/// variance `sigma^2`. With `sigma == 0` the input is returned bit-for-bit.
pub fn add_awgn(cfr: &CfrTensor, sigma: f64, rng_seed: u64) -> CfrTensor {
    let mut out = cfr.clone();
    add_awgn_in_place(out.as_mut_slice(), sigma, rng_seed);
    out
}

/// Noise kernel shared by every estimate-level noise injection.
pub(crate) fn add_awgn_in_place(data: &mut [Complex64], sigma: f64, rng_seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let sd = sigma * std::f64::consts::FRAC_1_SQRT_2;
    for z in data {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(re * sd, im * sd);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_channel(paths: Vec<PathComponent>, n: usize, s: usize, f: usize) -> MultipathChannel {
        MultipathChannel::new(paths, n, s, 3.125e6, f).unwrap()
    }

    #[test]
    fn subcarrier_range_even_and_odd() {
        assert_eq!(subcarrier_range(128), (-63, 63));
        assert_eq!(subcarrier_range(125), (-62, 61));
        // S=128, M=16 narrowband case handled by the same helper
        assert_eq!(subcarrier_range(128 / 16), (-3, 3));
    }

    #[test]
    fn zero_power_path_draws_zero_gains() {
        let mut p = PathComponent::from_range_angle(10.0, 30.0);
        p.gain_scale = 0.0;
        let ch = test_channel(vec![p, PathComponent::from_range_angle(12.0, 60.0)], 4, 16, 5);
        let gains = draw_frame_gains(&ch, 42);
        for i in 0..5 {
            assert_eq!(gains.get(0, i), Complex64::ZERO);
            assert_ne!(gains.get(1, i), Complex64::ZERO);
        }
    }

    #[test]
    fn gains_deterministic_and_unit_variance() {
        let ch = test_channel(
            vec![
                PathComponent::from_range_angle(10.0, 30.0),
                PathComponent::from_range_angle(12.0, 60.0),
            ],
            4,
            16,
            10,
        );
        let a = draw_frame_gains(&ch, 7);
        let b = draw_frame_gains(&ch, 7);
        for k in 0..2 {
            for i in 0..10 {
                assert_eq!(a.get(k, i), b.get(k, i));
            }
        }

        // Law of large numbers over repeated draws: >= 1000 samples per path.
        let mut sums = [0.0f64; 2];
        let trials = 200;
        for t in 0..trials {
            let g = draw_frame_gains(&ch, 1000 + t);
            for k in 0..2 {
                for i in 0..10 {
                    sums[k] += g.get(k, i).norm_sqr();
                }
            }
        }
        for sum in sums {
            let mean = sum / (trials * 10) as f64;
            assert!((mean - 1.0).abs() < 0.3, "sample variance {mean}");
        }
    }

    #[test]
    fn single_path_broadside_zero_delay_is_all_ones() {
        let ch = test_channel(vec![PathComponent::new(0.0, 90f64.to_radians())], 4, 16, 1);
        let gains = FrameGains::from_rows(1, 1, vec![Complex64::ONE]).unwrap();
        let cfr = synthesize_cfr(&ch, &gains).unwrap();
        for n in 0..4 {
            for s in cfr.subcarriers().collect::<Vec<_>>() {
                let h = cfr.get(n, 0, s);
                assert!((h - Complex64::ONE).norm() < 1e-12, "H_{n}(0,{s}) = {h}");
            }
        }
    }

    #[test]
    fn endfire_alternates_sign() {
        // theta -> 0: per-antenna factor e^{j n pi} = (-1)^n
        let ch = test_channel(vec![PathComponent::new(0.0, 1e-9)], 4, 8, 1);
        let gains = FrameGains::from_rows(1, 1, vec![Complex64::ONE]).unwrap();
        let cfr = synthesize_cfr(&ch, &gains).unwrap();
        for n in 0..4 {
            let expect = if n % 2 == 0 { 1.0 } else { -1.0 };
            let h = cfr.get(n, 0, 0);
            assert_relative_eq!(h.re, expect, max_relative = 1e-9);
            assert!(h.im.abs() < 1e-7);
        }
    }

    #[test]
    fn two_path_spot_check_matches_direct_sum() {
        let p0 = PathComponent::from_range_angle(10.0, 35.0);
        let p1 = PathComponent::from_range_angle(13.7, 112.0);
        let ch = test_channel(vec![p0.clone(), p1.clone()], 8, 64, 3);
        let gains = draw_frame_gains(&ch, 99);
        let cfr = synthesize_cfr(&ch, &gains).unwrap();

        let df = ch.subcarrier_spacing;
        for &(n, i, s) in &[(0usize, 0usize, -31i64), (3, 1, 0), (7, 2, 31), (5, 0, 17)] {
            let mut expect = Complex64::ZERO;
            for (k, p) in [&p0, &p1].iter().enumerate() {
                let phase = (n as f64) * std::f64::consts::PI * p.azimuth_rad.cos()
                    - 2.0 * std::f64::consts::PI * (s as f64) * df * p.delay_s;
                expect += gains.get(k, i) * Complex64::from_polar(1.0, phase);
            }
            let got = cfr.get(n, i, s);
            assert!((got - expect).norm() < 1e-10, "({n},{i},{s}): {got} vs {expect}");
        }
    }

    #[test]
    fn cfr_linear_in_gains() {
        let ch = test_channel(
            vec![
                PathComponent::from_range_angle(10.0, 30.0),
                PathComponent::from_range_angle(11.0, 75.0),
            ],
            4,
            32,
            2,
        );
        let g1 = draw_frame_gains(&ch, 1);
        let g2 = draw_frame_gains(&ch, 2);
        let sum = FrameGains::from_rows(
            2,
            2,
            (0..2)
                .flat_map(|k| (0..2).map(move |i| (k, i)))
                .map(|(k, i)| g1.get(k, i) + g2.get(k, i))
                .collect(),
        )
        .unwrap();
        let h1 = synthesize_cfr(&ch, &g1).unwrap();
        let h2 = synthesize_cfr(&ch, &g2).unwrap();
        let hs = synthesize_cfr(&ch, &sum).unwrap();
        for (idx, h) in hs.as_slice().iter().enumerate() {
            let expect = h1.as_slice()[idx] + h2.as_slice()[idx];
            assert!((h - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn single_path_has_constant_modulus() {
        let ch = test_channel(vec![PathComponent::from_range_angle(9.0, 50.0)], 6, 32, 4);
        let gains = draw_frame_gains(&ch, 5);
        let cfr = synthesize_cfr(&ch, &gains).unwrap();
        for i in 0..4 {
            let expect = gains.get(0, i).norm();
            for n in 0..6 {
                for s in ch_subcarriers(&cfr) {
                    assert_relative_eq!(cfr.get(n, i, s).norm(), expect, max_relative = 1e-10);
                }
            }
        }
    }

    fn ch_subcarriers(cfr: &CfrTensor) -> Vec<i64> {
        cfr.subcarriers().collect()
    }

    #[test]
    fn mirrored_azimuth_conjugates_antenna_phase() {
        let theta = 40f64.to_radians();
        let direct = PathComponent::new(0.0, theta);
        let mirror = PathComponent::new(0.0, std::f64::consts::PI - theta);
        let gains = FrameGains::from_rows(1, 1, vec![Complex64::ONE]).unwrap();
        let ha = synthesize_cfr(&test_channel(vec![direct], 4, 8, 1), &gains).unwrap();
        let hb = synthesize_cfr(&test_channel(vec![mirror], 4, 8, 1), &gains).unwrap();
        for n in 0..4 {
            let a = ha.get(n, 0, 0);
            let b = hb.get(n, 0, 0);
            assert!((a - b.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn sigma_for_snr_examples() {
        let one_path = test_channel(vec![PathComponent::from_range_angle(10.0, 30.0)], 1, 4, 1);
        let sigma = noise_sigma_for_snr(&one_path, 10.0).unwrap();
        assert_relative_eq!(sigma * sigma, 0.1, max_relative = 1e-12);

        let two_paths = test_channel(
            vec![
                PathComponent::from_range_angle(10.0, 30.0),
                PathComponent::from_range_angle(12.0, 40.0),
            ],
            1,
            4,
            1,
        );
        let sigma = noise_sigma_for_snr(&two_paths, 10.0).unwrap();
        assert_relative_eq!(sigma * sigma, 0.2, max_relative = 1e-12);

        let mut scaled = PathComponent::from_range_angle(10.0, 30.0);
        scaled.gain_scale = 4.0;
        let strong = test_channel(vec![scaled], 1, 4, 1);
        let sigma = noise_sigma_for_snr(&strong, 1.0).unwrap();
        assert_relative_eq!(sigma * sigma, 4.0, max_relative = 1e-12);

        assert!(matches!(
            noise_sigma_for_snr(&one_path, 0.0),
            Err(Error::NonPositiveSnr(_))
        ));
    }

    #[test]
    fn awgn_zero_sigma_is_identity_and_seeded() {
        let ch = test_channel(vec![PathComponent::from_range_angle(10.0, 30.0)], 2, 16, 2);
        let cfr = synthesize_cfr(&ch, &draw_frame_gains(&ch, 3)).unwrap();
        let clean = add_awgn(&cfr, 0.0, 77);
        assert_eq!(clean, cfr);

        let n1 = add_awgn(&cfr, 0.5, 123);
        let n2 = add_awgn(&cfr, 0.5, 123);
        assert_eq!(n1, n2);
        assert_ne!(n1, cfr);
    }

    #[test]
    fn awgn_empirical_variance() {
        let big = CfrTensor::zeros(4, 10, -63, 63);
        let noisy = add_awgn(&big, 1.0, 9);
        let var: f64 = noisy.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>()
            / noisy.as_slice().len() as f64;
        assert!((var - 1.0).abs() < 0.05, "empirical variance {var}");
    }
}
