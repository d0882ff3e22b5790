//! The hybrid receiver model: wideband analog-beamformed channel estimates,
//! multiplexed narrowband per-antenna estimates, the MRC-IIR beam update,
//! and the aggregate-sampling-rate accounting for the compared front-ends.

use num_complex::Complex64;

use crate::channel::{add_awgn_in_place, CfrTensor};
use crate::error::{Error, Result};

/// Complex analog combiner weights, one per antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    beta: Vec<Complex64>,
    /// Frame at which the weights were computed.
    pub frame_tag: i64,
}

impl BeamWeights {
    /// Weights must be finite and not identically zero.
    pub fn new(beta: Vec<Complex64>, frame_tag: i64) -> Result<Self> {
        if !beta.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if beta.iter().all(|z| *z == Complex64::ZERO) {
            return Err(Error::ZeroBeam);
        }
        Ok(Self { beta, frame_tag })
    }

    /// Uniform (all-ones) beam.
    pub fn uniform(n: usize) -> Self {
        Self {
            beta: vec![Complex64::ONE; n],
            frame_tag: -1,
        }
    }

    /// Matched (conjugate-steering) beam towards `azimuth_rad`:
    /// `beta_n = e^{-j n pi cos(theta)}`.
    pub fn matched(n: usize, azimuth_rad: f64) -> Self {
        let step = -std::f64::consts::PI * azimuth_rad.cos();
        Self {
            beta: (0..n)
                .map(|i| Complex64::from_polar(1.0, step * i as f64))
                .collect(),
            frame_tag: -1,
        }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.beta.iter().map(|b| b * factor).collect(), self.frame_tag)
    }
}

/// Wideband channel estimate behind the analog combiner, per frame and
/// subcarrier over the full usable set.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogEstimate {
    pub n_frames: usize,
    pub s_min: i64,
    pub s_max: i64,
    data: Vec<Complex64>,
}

impl AnalogEstimate {
    pub fn n_subcarriers(&self) -> usize {
        (self.s_max - self.s_min + 1) as usize
    }

    pub fn get(&self, frame: usize, s: i64) -> Complex64 {
        self.data[frame * self.n_subcarriers() + (s - self.s_min) as usize]
    }

    /// Frame `i` as a contiguous subcarrier slice (ascending s).
    pub fn frame(&self, i: usize) -> &[Complex64] {
        let n = self.n_subcarriers();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn subcarriers(&self) -> impl Iterator<Item = i64> + '_ {
        self.s_min..=self.s_max
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Apply a complex factor to every entry (test and invariance helper).
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= factor;
        }
        out
    }

    pub fn from_rows(n_frames: usize, s_min: i64, s_max: i64, data: Vec<Complex64>) -> Result<Self> {
        let n_sub = (s_max - s_min + 1) as usize;
        if data.len() != n_frames * n_sub {
            return Err(Error::ShapeMismatch(format!(
                "analog estimate needs {} entries, got {}",
                n_frames * n_sub,
                data.len()
            )));
        }
        Ok(Self {
            n_frames,
            s_min,
            s_max,
            data,
        })
    }
}

/// Narrowband per-antenna channel estimates from the multiplexed digital
/// chain, restricted to the subcarriers passed by the anti-alias filter.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalEstimateSet {
    /// Ordered antenna subset M = {m_0, ..., m_{M-1}}.
    pub antenna_set: Vec<usize>,
    pub n_frames: usize,
    pub s_min: i64,
    pub s_max: i64,
    data: Vec<Complex64>,
}

impl DigitalEstimateSet {
    pub fn n_antennas(&self) -> usize {
        self.antenna_set.len()
    }

    pub fn n_subcarriers(&self) -> usize {
        (self.s_max - self.s_min + 1) as usize
    }

    /// Estimate for the `idx`-th antenna of the set (not the physical
    /// antenna number) at (frame, subcarrier).
    pub fn get(&self, idx: usize, frame: usize, s: i64) -> Complex64 {
        let n_sub = self.n_subcarriers();
        self.data[(idx * self.n_frames + frame) * n_sub + (s - self.s_min) as usize]
    }

    pub fn subcarriers(&self) -> impl Iterator<Item = i64> + '_ {
        self.s_min..=self.s_max
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= factor;
        }
        out
    }
}

/// Multiplexer schedule: ADC sample `s` is served by antenna
/// `antenna_set[s mod M]`.
#[derive(Debug, Clone)]
pub struct MuxSchedule {
    pub antenna_set: Vec<usize>,
}

impl MuxSchedule {
    pub fn antenna_for_sample(&self, sample: usize) -> usize {
        self.antenna_set[sample % self.antenna_set.len()]
    }
}

/// Analog-beamformed estimate: `H_A(i, s) = sum_n beta_{n,i} H_n(i, s) + w`.
///
/// `weights_per_frame` holds either one constant beam or one beam per frame.
pub fn analog_estimate(
    cfr: &CfrTensor,
    weights_per_frame: &[BeamWeights],
    sigma: f64,
    rng_seed: u64,
) -> Result<AnalogEstimate> {
    if weights_per_frame.is_empty()
        || (weights_per_frame.len() != 1 && weights_per_frame.len() != cfr.n_frames)
    {
        return Err(Error::ShapeMismatch(format!(
            "need 1 or {} beams, got {}",
            cfr.n_frames,
            weights_per_frame.len()
        )));
    }
    for w in weights_per_frame {
        if w.len() != cfr.n_antennas {
            return Err(Error::ShapeMismatch(format!(
                "beam has {} weights for {} antennas",
                w.len(),
                cfr.n_antennas
            )));
        }
    }

    let n_sub = cfr.n_subcarriers();
    let mut data = vec![Complex64::ZERO; cfr.n_frames * n_sub];
    for i in 0..cfr.n_frames {
        let beam = if weights_per_frame.len() == 1 {
            &weights_per_frame[0]
        } else {
            &weights_per_frame[i]
        };
        let row = &mut data[i * n_sub..(i + 1) * n_sub];
        for (n, &b) in beam.weights().iter().enumerate() {
            for (r, out) in row.iter_mut().enumerate() {
                *out += b * cfr.get(n, i, cfr.s_min + r as i64);
            }
        }
    }
    add_awgn_in_place(&mut data, sigma, rng_seed);
    Ok(AnalogEstimate {
        n_frames: cfr.n_frames,
        s_min: cfr.s_min,
        s_max: cfr.s_max,
        data,
    })
}

/// Narrowband per-antenna estimates: `H_m(i, s) = H_m(i, s) + w` for
/// `m` in the antenna set, on the reduced range `{-ceil(S/2M)+1, ...,
/// floor(S/2M)-1}` where S is recovered from the wideband tensor.
pub fn digital_estimates(
    cfr: &CfrTensor,
    antenna_set: &[usize],
    m: usize,
    sigma: f64,
    rng_seed: u64,
) -> Result<DigitalEstimateSet> {
    if antenna_set.len() != m || m == 0 {
        return Err(Error::BadAntennaSet(format!(
            "antenna set has {} entries, expected {}",
            antenna_set.len(),
            m
        )));
    }
    let mut seen = vec![false; cfr.n_antennas];
    for &a in antenna_set {
        if a >= cfr.n_antennas {
            return Err(Error::BadAntennaSet(format!(
                "antenna {a} out of range (N = {})",
                cfr.n_antennas
            )));
        }
        if seen[a] {
            return Err(Error::BadAntennaSet(format!("antenna {a} repeated")));
        }
        seen[a] = true;
    }

    // Wideband usable count is S - 1, so S = count + 1. The filter keeps
    // {-ceil(S/2M)+1, ..., floor(S/2M)-1}.
    let s_total = (cfr.n_subcarriers() + 1) as i64;
    let two_m = 2 * m as i64;
    let s_min = -(s_total + two_m - 1) / two_m + 1;
    let s_max = s_total / two_m - 1;
    if s_min < cfr.s_min || s_max > cfr.s_max {
        return Err(Error::ShapeMismatch(format!(
            "narrowband range [{s_min}, {s_max}] exceeds wideband [{}, {}]",
            cfr.s_min, cfr.s_max
        )));
    }

    let n_sub = (s_max - s_min + 1) as usize;
    let mut data = Vec::with_capacity(m * cfr.n_frames * n_sub);
    for &antenna in antenna_set {
        for i in 0..cfr.n_frames {
            for s in s_min..=s_max {
                data.push(cfr.get(antenna, i, s));
            }
        }
    }
    add_awgn_in_place(&mut data, sigma, rng_seed);
    Ok(DigitalEstimateSet {
        antenna_set: antenna_set.to_vec(),
        n_frames: cfr.n_frames,
        s_min,
        s_max,
        data,
    })
}

/// De-interleave a multiplexed ADC stream: stream `j` receives the samples
/// at indices `M s + j`. The fixed per-stream delay `j T` is compensated in
/// the digital domain and therefore ignored here.
pub fn mux_demux_roundtrip(samples: &[Complex64], m: usize) -> Vec<Vec<Complex64>> {
    assert!(m >= 1, "multiplexer needs at least one branch");
    let mut streams = vec![Vec::with_capacity(samples.len() / m + 1); m];
    for (idx, &z) in samples.iter().enumerate() {
        streams[idx % m].push(z);
    }
    streams
}

/// Re-interleave per-antenna streams back into one ADC stream, inverse of
/// [`mux_demux_roundtrip`].
pub fn mux_interleave(streams: &[Vec<Complex64>]) -> Vec<Complex64> {
    let m = streams.len();
    let total: usize = streams.iter().map(|s| s.len()).sum();
    let mut out = Vec::with_capacity(total);
    let mut idx = 0usize;
    while out.len() < total {
        let j = idx % m;
        let pos = idx / m;
        if pos < streams[j].len() {
            out.push(streams[j][pos]);
        }
        idx += 1;
    }
    out
}

/// MRC beam update with an IIR smoother:
/// `beta_{m,i+1} = mu beta_{m,i} + (1 - mu) conj(H_m(i, 0))`.
/// Antennas outside the digital set keep their previous weights.
pub fn update_beam_mrc_iir(
    prev: &BeamWeights,
    digital: &DigitalEstimateSet,
    frame: usize,
    mu: f64,
) -> Result<BeamWeights> {
    if frame >= digital.n_frames {
        return Err(Error::ShapeMismatch(format!(
            "frame {frame} out of range ({} frames)",
            digital.n_frames
        )));
    }
    if digital.s_min > 0 || digital.s_max < 0 {
        return Err(Error::MissingDcSubcarrier);
    }
    let mut beta = prev.weights().to_vec();
    for (idx, &antenna) in digital.antenna_set.iter().enumerate() {
        if antenna >= beta.len() {
            return Err(Error::BadAntennaSet(format!(
                "antenna {antenna} outside the beam ({} weights)",
                beta.len()
            )));
        }
        let dc = digital.get(idx, frame, 0);
        beta[antenna] = beta[antenna] * mu + dc.conj() * (1.0 - mu);
    }
    BeamWeights::new(beta, frame as i64)
}

/// Receiver front-end architectures compared throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// Purely analog beamforming: one wideband ADC.
    Analog,
    /// Hybrid: wideband analog chain plus one multiplexed narrowband ADC.
    Proposed,
    /// One wideband ADC per antenna.
    FullMimo,
}

/// Total ADC sampling rate in samples/s for a front-end over bandwidth
/// `b_a`: analog B_A, proposed 2 B_A, fully digital N B_A.
pub fn aggregate_sampling_rate(arch: Architecture, n: usize, b_a: f64) -> f64 {
    match arch {
        Architecture::Analog => b_a,
        Architecture::Proposed => 2.0 * b_a,
        Architecture::FullMimo => n as f64 * b_a,
    }
}
