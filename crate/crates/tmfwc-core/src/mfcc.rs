//! FFT-domain MFCC pipeline used as the accuracy/cost baseline.
//!
//! Five stages: framing/windowing, DFT power spectrum, mel filterbank,
//! log + cosine transform, optional delta/delta-delta trajectories.
//!
//! The cepstrum uses the cosine phase `(m - 0.5)` throughout. The more
//! common DCT-II convention is `(m + 0.5)`; the difference is an index
//! shift and the tests target the phase implemented here.
//!
//! Every call to [`dft_power_spectrum`] or [`dft_power_spectrum_direct`]
//! increments the [`crate::metrics`] transform counter; the direct mode
//! exists as an O(N^2) oracle for the FFT path.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::audio::{apply_window, frame_signal, AudioBuffer, AudioError, WindowKind};
use crate::features::FeatureMatrix;
use crate::metrics;

#[derive(Debug, Error)]
pub enum MfccError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("negative frequency: {0}")]
    NegativeFrequency(f64),
    #[error("degenerate filter: edges {0} and {1} quantize to bin {2} (fft_size too small for this many filters)")]
    DegenerateFilter(usize, usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sample rate mismatch: buffer {buffer_hz} Hz vs spec {spec_hz} Hz")]
    SampleRateMismatch { buffer_hz: u32, spec_hz: u32 },
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

// ---------------------------------------------------------------------------
// Mel scale
// ---------------------------------------------------------------------------

/// Perceptual mel value of a physical frequency: 2595 * log10(1 + f/700).
pub fn hz_to_mel(f_hz: f64) -> Result<f64, MfccError> {
    if f_hz < 0.0 {
        return Err(MfccError::NegativeFrequency(f_hz));
    }
    Ok(2595.0 * (1.0 + f_hz / 700.0).log10())
}

/// Exact inverse of [`hz_to_mel`]: 700 * (10^(m/2595) - 1).
pub fn mel_to_hz(mel: f64) -> Result<f64, MfccError> {
    if mel < 0.0 {
        return Err(MfccError::NegativeFrequency(mel));
    }
    Ok(700.0 * (10.0_f64.powf(mel / 2595.0) - 1.0))
}

// ---------------------------------------------------------------------------
// DFT power spectrum
// ---------------------------------------------------------------------------

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_dft_args(frame: &[f64], fft_size: usize) -> Result<(), MfccError> {
    if frame.is_empty() {
        return Err(MfccError::Audio(AudioError::InvalidFraming("empty frame".into())));
    }
    if frame.len() > fft_size {
        return Err(MfccError::Audio(AudioError::InvalidFraming(format!(
            "frame of {} samples exceeds fft_size {}",
            frame.len(),
            fft_size
        ))));
    }
    if !fft_size.is_power_of_two() {
        return Err(MfccError::InvalidSpec(format!("fft_size {fft_size} is not a power of two")));
    }
    Ok(())
}

/// Power spectrum |X(k)|^2 for k = 0..fft_size/2 via FFT, zero-padding the
/// frame up to `fft_size`. Counts one transform and the conventional
/// 2 * N * log2(N) radix-2 real-multiply estimate towards the MAC counter.
pub fn dft_power_spectrum(frame: &[f64], fft_size: usize) -> Result<Vec<f64>, MfccError> {
    check_dft_args(frame, fft_size)?;
    let mut buf: Vec<Complex<f64>> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
    buf.resize(fft_size, Complex::new(0.0, 0.0));
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(fft_size);
        fft.process(&mut buf);
    });
    metrics::record_transform();
    metrics::record_macs(2 * (fft_size as u64) * (fft_size.trailing_zeros() as u64));
    Ok(buf[..=fft_size / 2].iter().map(|c| c.norm_sqr()).collect())
}

/// O(N^2) direct evaluation of the same power spectrum, term by term.
/// This is the oracle for [`dft_power_spectrum`]; it shares no code with
/// the FFT path.
pub fn dft_power_spectrum_direct(frame: &[f64], fft_size: usize) -> Result<Vec<f64>, MfccError> {
    check_dft_args(frame, fft_size)?;
    metrics::record_transform();
    let n = fft_size as f64;
    let mut out = Vec::with_capacity(fft_size / 2 + 1);
    for k in 0..=fft_size / 2 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, &x) in frame.iter().enumerate() {
            let phase = -2.0 * PI * (i as f64) * (k as f64) / n;
            re += x * phase.cos();
            im += x * phase.sin();
        }
        out.push(re * re + im * im);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Mel filterbank
// ---------------------------------------------------------------------------

/// Geometry of a triangular mel filterbank.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MelFilterbankSpec {
    pub num_filters: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub fft_size: usize,
    pub sample_rate_hz: u32,
}

impl Default for MelFilterbankSpec {
    /// The 25-filter, 0-4000 Hz, 1024-point bank at 8 kHz.
    fn default() -> Self {
        Self {
            num_filters: 25,
            f_min_hz: 0.0,
            f_max_hz: 4000.0,
            fft_size: 1024,
            sample_rate_hz: 8000,
        }
    }
}

impl MelFilterbankSpec {
    pub fn validate(&self) -> Result<(), MfccError> {
        if self.num_filters < 2 {
            return Err(MfccError::InvalidSpec("need at least 2 filters".into()));
        }
        if !self.fft_size.is_power_of_two() {
            return Err(MfccError::InvalidSpec(format!(
                "fft_size {} is not a power of two",
                self.fft_size
            )));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if !(0.0 <= self.f_min_hz && self.f_min_hz < self.f_max_hz && self.f_max_hz <= nyquist) {
            return Err(MfccError::InvalidSpec(format!(
                "need 0 <= f_min < f_max <= {} Hz, got [{}, {}]",
                nyquist, self.f_min_hz, self.f_max_hz
            )));
        }
        Ok(())
    }

    /// The M+2 triangle edge frequencies, uniformly spaced in mel between
    /// f_min and f_max and mapped back to Hz (continuous, pre-quantization).
    pub fn edge_freqs_hz(&self) -> Result<Vec<f64>, MfccError> {
        self.validate()?;
        let mel_lo = hz_to_mel(self.f_min_hz)?;
        let mel_hi = hz_to_mel(self.f_max_hz)?;
        let m = self.num_filters;
        (0..=m + 1)
            .map(|i| {
                let mel = mel_lo + (mel_hi - mel_lo) * i as f64 / (m + 1) as f64;
                mel_to_hz(mel)
            })
            .collect()
    }
}

/// Triangular filterbank quantized onto FFT bins, unit peak per row.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// num_filters x (fft_size/2 + 1), row-major.
    weights: Vec<f64>,
    num_bins: usize,
    pub center_freqs_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn num_filters(&self) -> usize {
        self.center_freqs_hz.len()
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.num_bins..(m + 1) * self.num_bins]
    }
}

/// Quantize the mel-uniform edges onto FFT bins and build the triangles.
/// Filter `i` rises linearly from edge `i` to edge `i+1` and falls to edge
/// `i+2`; peaks are unit height (no area normalization).
pub fn build_mel_filterbank(spec: &MelFilterbankSpec) -> Result<MelFilterbank, MfccError> {
    let edges_hz = spec.edge_freqs_hz()?;
    let num_bins = spec.fft_size / 2 + 1;
    let bin_hz = spec.sample_rate_hz as f64 / spec.fft_size as f64;
    let bins: Vec<usize> =
        edges_hz.iter().map(|&f| ((f / bin_hz).round() as usize).min(num_bins - 1)).collect();
    for i in 0..bins.len() - 1 {
        if bins[i] == bins[i + 1] {
            return Err(MfccError::DegenerateFilter(i, i + 1, bins[i]));
        }
    }

    let m = spec.num_filters;
    let mut weights = vec![0.0; m * num_bins];
    let mut center_freqs_hz = Vec::with_capacity(m);
    for f in 0..m {
        let (b0, b1, b2) = (bins[f], bins[f + 1], bins[f + 2]);
        for k in b0..=b1 {
            weights[f * num_bins + k] = (k - b0) as f64 / (b1 - b0) as f64;
        }
        for k in b1..=b2 {
            weights[f * num_bins + k] = (b2 - k) as f64 / (b2 - b1) as f64;
        }
        weights[f * num_bins + b1] = 1.0;
        center_freqs_hz.push(edges_hz[f + 1]);
    }
    Ok(MelFilterbank { weights, num_bins, center_freqs_hz })
}

/// Mel energies s(m) = sum_k weights[m][k] * power[k].
pub fn apply_filterbank(power: &[f64], fb: &MelFilterbank) -> Result<Vec<f64>, MfccError> {
    if power.len() != fb.num_bins {
        return Err(MfccError::DimensionMismatch(format!(
            "spectrum has {} bins, filterbank expects {}",
            power.len(),
            fb.num_bins
        )));
    }
    let mut energies = Vec::with_capacity(fb.num_filters());
    for m in 0..fb.num_filters() {
        let row = fb.row(m);
        energies.push(row.iter().zip(power).map(|(w, p)| w * p).sum());
    }
    metrics::record_macs((fb.num_filters() * fb.num_bins) as u64);
    Ok(energies)
}

// ---------------------------------------------------------------------------
// Cepstrum and deltas
// ---------------------------------------------------------------------------

/// How many temporal-derivative blocks to append to the static cepstra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum DeltaOrder {
    #[default]
    None,
    Delta,
    DeltaDelta,
}

/// Cepstrum and pipeline knobs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub num_ceps: usize,
    pub include_c0: bool,
    pub delta_width: usize,
    pub deltas: DeltaOrder,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub window: WindowKind,
    pub floor_eps: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            num_ceps: 13,
            include_c0: false,
            delta_width: 2,
            deltas: DeltaOrder::None,
            frame_ms: 20.0,
            hop_ms: 10.0,
            window: WindowKind::Hamming,
            floor_eps: 1e-10,
        }
    }
}

/// Cepstral coefficients c(n) = sum_m log10(max(s(m), eps)) * cos(pi*n*(m-0.5)/M).
///
/// With `include_c0` the returned orders are n = 0..C-1, otherwise
/// n = 1..C; either way `num_ceps` values come back.
pub fn dct_cepstrum(
    mel_energies: &[f64],
    num_ceps: usize,
    floor_eps: f64,
    include_c0: bool,
) -> Result<Vec<f64>, MfccError> {
    let m_count = mel_energies.len();
    if num_ceps == 0 || num_ceps > m_count {
        return Err(MfccError::DimensionMismatch(format!(
            "num_ceps {num_ceps} out of range 1..={m_count}"
        )));
    }
    let logs: Vec<f64> = mel_energies.iter().map(|&s| s.max(floor_eps).log10()).collect();
    let first = if include_c0 { 0 } else { 1 };
    let mut out = Vec::with_capacity(num_ceps);
    for n in first..first + num_ceps {
        let mut acc = 0.0;
        for (m, &l) in logs.iter().enumerate() {
            acc += l * (PI * n as f64 * (m as f64 - 0.5) / m_count as f64).cos();
        }
        out.push(acc);
    }
    metrics::record_macs((num_ceps * m_count) as u64);
    Ok(out)
}

/// Regression delta d_t = sum_n n*(c_{t+n} - c_{t-n}) / (2 * sum_n n^2)
/// over each column of the trajectory, replicating edge frames.
pub fn delta(trajectory: &[Vec<f64>], n_width: usize) -> Result<Vec<Vec<f64>>, MfccError> {
    if trajectory.is_empty() {
        return Err(MfccError::EmptyTrajectory);
    }
    if n_width == 0 {
        return Err(MfccError::DimensionMismatch("delta width must be >= 1".into()));
    }
    let len = trajectory.len();
    let dims = trajectory[0].len();
    let denom: f64 = 2.0 * (1..=n_width).map(|n| (n * n) as f64).sum::<f64>();
    let clamp = |t: isize| -> usize { t.clamp(0, len as isize - 1) as usize };
    let mut out = Vec::with_capacity(len);
    for t in 0..len as isize {
        let mut row = vec![0.0; dims];
        for n in 1..=n_width as isize {
            let fwd = &trajectory[clamp(t + n)];
            let bwd = &trajectory[clamp(t - n)];
            for d in 0..dims {
                row[d] += n as f64 * (fwd[d] - bwd[d]);
            }
        }
        for v in &mut row {
            *v /= denom;
        }
        out.push(row);
    }
    metrics::record_macs((len * dims * 2 * n_width) as u64);
    Ok(out)
}

/// Full MFCC extraction: frame, window, power spectrum, filterbank,
/// cepstrum, optional deltas. Column order is statics, deltas,
/// delta-deltas.
pub fn mfcc_pipeline(
    buf: &AudioBuffer,
    spec: &MelFilterbankSpec,
    cfg: &MfccConfig,
) -> Result<FeatureMatrix, MfccError> {
    let fb = build_mel_filterbank(spec)?;
    mfcc_pipeline_with_bank(buf, &fb, spec, cfg)
}

/// [`mfcc_pipeline`] over a filterbank built once and shared across calls.
pub fn mfcc_pipeline_with_bank(
    buf: &AudioBuffer,
    fb: &MelFilterbank,
    spec: &MelFilterbankSpec,
    cfg: &MfccConfig,
) -> Result<FeatureMatrix, MfccError> {
    if buf.sample_rate_hz() != spec.sample_rate_hz {
        return Err(MfccError::SampleRateMismatch {
            buffer_hz: buf.sample_rate_hz(),
            spec_hz: spec.sample_rate_hz,
        });
    }
    let frames = frame_signal(buf, cfg.frame_ms, cfg.hop_ms)?;
    if frames.frame_len > spec.fft_size {
        return Err(MfccError::InvalidSpec(format!(
            "frame_len {} exceeds fft_size {}",
            frames.frame_len, spec.fft_size
        )));
    }
    let windowed = apply_window(&frames, cfg.window)?;
    metrics::record_macs((windowed.frames.len() * frames.frame_len) as u64);

    let mut statics = Vec::with_capacity(windowed.frames.len());
    for frame in &windowed.frames {
        let power = dft_power_spectrum(frame, spec.fft_size)?;
        let energies = apply_filterbank(&power, fb)?;
        statics.push(dct_cepstrum(&energies, cfg.num_ceps, cfg.floor_eps, cfg.include_c0)?);
    }

    let rows = match cfg.deltas {
        DeltaOrder::None => statics,
        DeltaOrder::Delta => {
            let d = delta(&statics, cfg.delta_width)?;
            statics
                .into_iter()
                .zip(d)
                .map(|(mut s, d)| {
                    s.extend(d);
                    s
                })
                .collect()
        }
        DeltaOrder::DeltaDelta => {
            let d = delta(&statics, cfg.delta_width)?;
            let dd = delta(&d, cfg.delta_width)?;
            statics
                .into_iter()
                .zip(d)
                .zip(dd)
                .map(|((mut s, d), dd)| {
                    s.extend(d);
                    s.extend(dd);
                    s
                })
                .collect()
        }
    };

    FeatureMatrix::from_row_vecs(&rows).map_err(|e| MfccError::DimensionMismatch(e.to_string()))
}

/// CSV header names for an MFCC feature matrix.
pub fn mfcc_column_names(cfg: &MfccConfig) -> Vec<String> {
    let first = if cfg.include_c0 { 0 } else { 1 };
    let orders: Vec<usize> = (first..first + cfg.num_ceps).collect();
    let mut names: Vec<String> = orders.iter().map(|n| format!("c{n}")).collect();
    if matches!(cfg.deltas, DeltaOrder::Delta | DeltaOrder::DeltaDelta) {
        names.extend(orders.iter().map(|n| format!("d{n}")));
    }
    if matches!(cfg.deltas, DeltaOrder::DeltaDelta) {
        names.extend(orders.iter().map(|n| format!("dd{n}")));
    }
    names
}
