//! Discrete multi-level wavelet decomposition and a sampled continuous
//! transform.
//!
//! Two orthonormal families: Haar and the 4-tap Daubechies filter. The
//! high-pass filter is always the quadrature mirror g(k) = (-1)^k * h(L-1-k).
//!
//! A single level correlates the (extended) signal with each filter at
//! even offsets, so level k holds ceil(previous/2) coefficients. The
//! default boundary is periodic wrap-around, which keeps the analysis
//! orthogonal on even lengths and therefore exactly invertible;
//! symmetric reflection is available as an alternative. The inverse
//! transform is deliberately not part of this module — reconstruction
//! checks build their own adjoint in test code.

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::features::FeatureMatrix;

#[derive(Debug, Error)]
pub enum WaveletError {
    #[error("signal too short: {len} samples for filter of length {filter_len}")]
    SignalTooShort { len: usize, filter_len: usize },
    #[error("too many levels: {requested} requested, at most {max} for {len} samples")]
    TooManyLevels { requested: usize, max: usize, len: usize },
    #[error("invalid scale: {0} (must be > 0)")]
    InvalidScale(f64),
}

/// Orthonormal wavelet family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WaveletFamily {
    Haar,
    /// 4-tap Daubechies filter (two vanishing moments).
    Daubechies4,
}

impl WaveletFamily {
    /// Low-pass decomposition filter h, with sum(h^2) = 1.
    pub fn lowpass(self) -> Vec<f64> {
        let s = std::f64::consts::SQRT_2;
        match self {
            WaveletFamily::Haar => vec![1.0 / s, 1.0 / s],
            WaveletFamily::Daubechies4 => {
                let r3 = 3.0_f64.sqrt();
                let d = 4.0 * s;
                vec![(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d]
            }
        }
    }

    /// Quadrature-mirror high-pass: g(k) = (-1)^k * h(L-1-k).
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let len = h.len();
        (0..len)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * h[len - 1 - k]
            })
            .collect()
    }
}

/// Boundary handling for the decimated transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum BoundaryMode {
    /// Wrap around; keeps the analysis orthogonal on even lengths.
    #[default]
    Periodic,
    /// Reflect the tail: x[len + j] = x[len - 1 - j].
    Symmetric,
}

/// Family, depth, and boundary mode of a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub levels: usize,
    #[serde(default)]
    pub boundary: BoundaryMode,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self { family: WaveletFamily::Haar, levels: 6, boundary: BoundaryMode::Periodic }
    }
}

/// Output of [`dwt_multilevel`]: the final low-pass band plus one
/// high-pass band per level, level 1 (finest) first.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
}

impl WaveletDecomposition {
    /// Total coefficient count across all bands.
    pub fn len(&self) -> usize {
        self.approx.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bands as a padded matrix: detail rows finest-first, approx last,
    /// each zero-padded to the widest band.
    pub fn to_matrix(&self) -> FeatureMatrix {
        let width = self
            .details
            .iter()
            .map(Vec::len)
            .chain(std::iter::once(self.approx.len()))
            .max()
            .unwrap_or(0);
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.details.len() + 1);
        for d in &self.details {
            let mut row = d.clone();
            row.resize(width, 0.0);
            rows.push(row);
        }
        let mut last = self.approx.clone();
        last.resize(width, 0.0);
        rows.push(last);
        FeatureMatrix::from_row_vecs(&rows).expect("padded rows share a width")
    }
}

fn extended_sample(x: &[f64], idx: usize, mode: BoundaryMode) -> f64 {
    if idx < x.len() {
        x[idx]
    } else {
        match mode {
            BoundaryMode::Periodic => x[idx % x.len()],
            BoundaryMode::Symmetric => {
                let over = idx - x.len();
                x[x.len() - 1 - (over % x.len())]
            }
        }
    }
}

fn analyze(x: &[f64], filter: &[f64], mode: BoundaryMode) -> Vec<f64> {
    let out_len = x.len().div_ceil(2);
    let mut out = Vec::with_capacity(out_len);
    for i in 0..out_len {
        let mut acc = 0.0;
        for (k, &f) in filter.iter().enumerate() {
            acc += f * extended_sample(x, 2 * i + k, mode);
        }
        out.push(acc);
    }
    crate::metrics::record_macs((out_len * filter.len()) as u64);
    out
}

/// One analysis step: correlate with h and g at even offsets.
/// Returns (approximation, detail), each of ceil(len/2) coefficients.
pub fn dwt_single_level(
    x: &[f64],
    family: WaveletFamily,
    boundary: BoundaryMode,
) -> Result<(Vec<f64>, Vec<f64>), WaveletError> {
    let h = family.lowpass();
    let min_len = match boundary {
        // periodic wrap folds any even length; symmetric reflection
        // needs the full filter support inside the signal
        BoundaryMode::Periodic => 2,
        BoundaryMode::Symmetric => h.len(),
    };
    if x.len() < min_len {
        return Err(WaveletError::SignalTooShort { len: x.len(), filter_len: h.len() });
    }
    let g = family.highpass();
    Ok((analyze(x, &h, boundary), analyze(x, &g, boundary)))
}

/// Cascade of [`dwt_single_level`]: each level re-decomposes the previous
/// approximation. `details[0]` is the finest level.
pub fn dwt_multilevel(x: &[f64], spec: &WaveletSpec) -> Result<WaveletDecomposition, WaveletError> {
    let max = if x.len() < 2 { 0 } else { x.len().ilog2() as usize };
    if spec.levels == 0 || spec.levels > max {
        return Err(WaveletError::TooManyLevels { requested: spec.levels, max, len: x.len() });
    }
    let mut details = Vec::with_capacity(spec.levels);
    let mut current = x.to_vec();
    for _ in 0..spec.levels {
        let (approx, detail) = dwt_single_level(&current, spec.family, spec.boundary)?;
        details.push(detail);
        current = approx;
    }
    Ok(WaveletDecomposition { approx: current, details })
}

// ---------------------------------------------------------------------------
// Continuous transform (sampled)
// ---------------------------------------------------------------------------

/// Mother wavelet sampled on a dyadic grid, for evaluating the continuous
/// transform. Haar is exact; Daubechies is generated by the cascade
/// iteration of its refinement relation.
#[derive(Debug, Clone)]
pub struct MotherWavelet {
    family: WaveletFamily,
    /// psi samples on [0, support) at resolution 2^-levels (empty for Haar).
    samples: Vec<f64>,
    resolution: f64,
    support: f64,
}

impl MotherWavelet {
    pub fn new(family: WaveletFamily) -> Self {
        match family {
            WaveletFamily::Haar => {
                Self { family, samples: Vec::new(), resolution: 0.0, support: 1.0 }
            }
            WaveletFamily::Daubechies4 => {
                let levels = 12i32;
                let h = family.lowpass();
                let g = family.highpass();
                // synthesis cascade from a single detail coefficient: the
                // first (coarsest) step uses g, every subsequent refinement
                // uses h; after all steps the values approximate psi on the
                // grid t = m * 2^-(levels+1)
                let mut psi = refine(&[1.0], &g);
                for _ in 0..levels {
                    psi = refine(&psi, &h);
                }
                let support = (h.len() - 1) as f64;
                let resolution = 0.5_f64.powi(levels + 1);
                Self { family, samples: psi, resolution, support }
            }
        }
    }

    /// Width of [0, support), outside of which psi vanishes.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// psi(t), linearly interpolated for the cascade-generated families.
    pub fn eval(&self, t: f64) -> f64 {
        match self.family {
            WaveletFamily::Haar => {
                if (0.0..0.5).contains(&t) {
                    1.0
                } else if (0.5..1.0).contains(&t) {
                    -1.0
                } else {
                    0.0
                }
            }
            WaveletFamily::Daubechies4 => {
                if t < 0.0 || t >= self.support {
                    return 0.0;
                }
                let pos = t / self.resolution;
                let lo = pos.floor() as usize;
                if lo + 1 >= self.samples.len() {
                    return 0.0;
                }
                let frac = pos - lo as f64;
                self.samples[lo] + frac * (self.samples[lo + 1] - self.samples[lo])
            }
        }
    }
}

/// One cascade refinement: upsample by two, convolve with sqrt(2)*filter.
fn refine(values: &[f64], filter: &[f64]) -> Vec<f64> {
    let s = std::f64::consts::SQRT_2;
    let out_len = 2 * values.len() + filter.len() - 2;
    let mut out = vec![0.0; out_len];
    for (i, &v) in values.iter().enumerate() {
        for (k, &f) in filter.iter().enumerate() {
            out[2 * i + k] += s * f * v;
        }
    }
    out
}

/// Riemann-sum discretization of the continuous wavelet coefficient
/// X(a, b) = (1/sqrt(a)) * sum_n x(t_n) * psi((t_n - b)/a) * dt.
pub fn cwt_coefficient(
    x: &AudioBuffer,
    scale: f64,
    shift_s: f64,
    mother: &MotherWavelet,
) -> Result<f64, WaveletError> {
    if scale <= 0.0 {
        return Err(WaveletError::InvalidScale(scale));
    }
    let fs = x.sample_rate_hz() as f64;
    let dt = 1.0 / fs;
    // psi support is [0, support): only samples with (t - b)/a inside contribute
    let t_lo = shift_s;
    let t_hi = shift_s + scale * mother.support();
    let n_lo = ((t_lo * fs).floor().max(0.0)) as usize;
    let n_hi = ((t_hi * fs).ceil().max(0.0) as usize).min(x.len());
    let mut acc = 0.0;
    for n in n_lo..n_hi {
        let t = n as f64 * dt;
        acc += x.samples()[n] * mother.eval((t - shift_s) / scale);
    }
    Ok(acc * dt / scale.sqrt())
}
