//! Time-domain mel-frequency wavelet coefficient extraction.
//!
//! Each mel channel is represented by a table of (frequency, parameter)
//! components sampled from its triangular filter response. Superposing
//! parameter-weighted sines gives the channel's imaginary kernel and
//! cosines its real kernel; convolving audio with both, taking the
//! pointwise magnitude sqrt(real^2 + imag^2), and absolute max-pooling
//! the envelope yields one feature column per channel.
//!
//! Convolution is direct (time-domain) FIR with "same" alignment, so the
//! coefficient length tracks the signal length and nothing on this path
//! touches a frequency-domain transform.

use std::path::Path;

use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::features::FeatureMatrix;
use crate::metrics;
use crate::mfcc::MelFilterbankSpec;

#[derive(Debug, Error)]
pub enum TmfwcError {
    #[error(
        "empty support: channel {channel} has no component inside its band (spacing too wide)"
    )]
    EmptySupport { channel: usize },
    #[error("aliased component: {freq_hz} Hz >= Nyquist {nyquist_hz} Hz")]
    AliasedComponent { freq_hz: f64, nyquist_hz: f64 },
    #[error("sample rate mismatch: buffer {buffer_hz} Hz vs kernel {kernel_hz} Hz")]
    SampleRateMismatch { buffer_hz: u32, kernel_hz: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid component table: {0}")]
    InvalidTable(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("filterbank spec: {0}")]
    Spec(#[from] crate::mfcc::MfccError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// One (frequency, parameter) pair of a channel's synthesis table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Component {
    pub freq_hz: f64,
    pub parameter: f64,
}

/// Per-channel component tables: the synthesis recipe for the whole
/// time-domain filterbank.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MelComponentTable {
    channels: Vec<Vec<Component>>,
}

impl MelComponentTable {
    /// Wrap and validate channel component lists: within a channel the
    /// frequencies must strictly increase, parameters must be positive,
    /// and the parameter profile must rise then fall.
    pub fn new(channels: Vec<Vec<Component>>) -> Result<Self, TmfwcError> {
        for (idx, ch) in channels.iter().enumerate() {
            if ch.is_empty() {
                return Err(TmfwcError::EmptySupport { channel: idx });
            }
            for w in ch.windows(2) {
                if w[1].freq_hz <= w[0].freq_hz {
                    return Err(TmfwcError::InvalidTable(format!(
                        "channel {idx}: frequencies not strictly increasing at {} Hz",
                        w[1].freq_hz
                    )));
                }
            }
            if ch.iter().any(|c| c.parameter <= 0.0) {
                return Err(TmfwcError::InvalidTable(format!(
                    "channel {idx}: non-positive parameter"
                )));
            }
            let peak = ch
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.parameter.partial_cmp(&b.1.parameter).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let rising = ch.windows(2).take(peak).all(|w| w[0].parameter <= w[1].parameter);
            let falling = ch.windows(2).skip(peak).all(|w| w[0].parameter >= w[1].parameter);
            if !(rising && falling) {
                return Err(TmfwcError::InvalidTable(format!(
                    "channel {idx}: parameters are not unimodal"
                )));
            }
        }
        Ok(Self { channels })
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, idx: usize) -> &[Component] {
        &self.channels[idx]
    }

    /// Load from CSV with header `channel,freq_hz,parameter`. Channel ids
    /// are grouped and ordered ascending; ids in the file are 1-based by
    /// convention but any ascending set works.
    pub fn read_csv(path: &Path) -> Result<Self, TmfwcError> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| TmfwcError::InvalidTable(format!("{}: {e}", path.display())))?;
        let mut rows: Vec<(u32, Component)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| TmfwcError::InvalidTable(e.to_string()))?;
            if rec.len() != 3 {
                return Err(TmfwcError::InvalidTable(format!(
                    "expected 3 columns, got {}",
                    rec.len()
                )));
            }
            let parse = |i: usize| -> Result<f64, TmfwcError> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|e| TmfwcError::InvalidTable(format!("field {:?}: {e}", &rec[i])))
            };
            let channel = parse(0)? as u32;
            rows.push((channel, Component { freq_hz: parse(1)?, parameter: parse(2)? }));
        }
        if rows.is_empty() {
            return Err(TmfwcError::InvalidTable("no component rows".into()));
        }
        let mut ids: Vec<u32> = rows.iter().map(|(c, _)| *c).collect();
        ids.sort_unstable();
        ids.dedup();
        let channels = ids
            .iter()
            .map(|id| {
                let mut ch: Vec<Component> =
                    rows.iter().filter(|(c, _)| c == id).map(|(_, comp)| *comp).collect();
                ch.sort_by(|a, b| a.freq_hz.partial_cmp(&b.freq_hz).unwrap());
                ch
            })
            .collect();
        Self::new(channels)
    }

    /// Write the CSV form read by [`MelComponentTable::read_csv`],
    /// 1-based channel ids.
    pub fn write_csv(&self, path: &Path) -> Result<(), TmfwcError> {
        let mut out = String::from("channel,freq_hz,parameter\n");
        for (idx, ch) in self.channels.iter().enumerate() {
            for c in ch {
                out.push_str(&format!("{},{},{}\n", idx + 1, c.freq_hz, c.parameter));
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Kernel synthesis and pooling knobs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TmfwcConfig {
    pub num_channels: usize,
    pub kernel_ms: f64,
    pub taper: Taper,
    pub pool_window_ms: f64,
    pub component_spacing_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Taper {
    None,
    #[default]
    Hann,
}

impl Default for TmfwcConfig {
    fn default() -> Self {
        Self {
            num_channels: 10,
            kernel_ms: 25.0,
            taper: Taper::Hann,
            pool_window_ms: 8.0,
            component_spacing_hz: 10.0,
        }
    }
}

impl TmfwcConfig {
    pub fn validate(&self) -> Result<(), TmfwcError> {
        if self.num_channels == 0 {
            return Err(TmfwcError::InvalidConfig("num_channels must be >= 1".into()));
        }
        if self.kernel_ms <= 0.0 || self.pool_window_ms <= 0.0 || self.component_spacing_hz <= 0.0 {
            return Err(TmfwcError::InvalidConfig(
                "kernel_ms, pool_window_ms, component_spacing_hz must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn pool_window_samples(&self, sample_rate_hz: u32) -> usize {
        ((self.pool_window_ms * sample_rate_hz as f64 / 1000.0).round() as usize).max(1)
    }
}

/// Sample each channel's continuous triangular mel filter response on a
/// uniform grid `left_edge + k * spacing`, keeping strictly interior
/// points (weight > 0). Peaks are unit height. To reproduce a published
/// table verbatim, load it with [`MelComponentTable::read_csv`] instead.
pub fn derive_component_table(
    spec: &MelFilterbankSpec,
    spacing_hz: f64,
) -> Result<MelComponentTable, TmfwcError> {
    if spacing_hz <= 0.0 {
        return Err(TmfwcError::InvalidConfig("spacing must be > 0".into()));
    }
    let edges = spec.edge_freqs_hz()?;
    let mut channels = Vec::with_capacity(spec.num_filters);
    for m in 0..spec.num_filters {
        let (left, peak, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let mut comps = Vec::new();
        let mut k = 1usize;
        loop {
            let f = left + spacing_hz * k as f64;
            if f >= right {
                break;
            }
            let weight =
                if f <= peak { (f - left) / (peak - left) } else { (right - f) / (right - peak) };
            if weight > 0.0 {
                comps.push(Component { freq_hz: f, parameter: weight });
            }
            k += 1;
        }
        if comps.is_empty() {
            return Err(TmfwcError::EmptySupport { channel: m });
        }
        channels.push(comps);
    }
    MelComponentTable::new(channels)
}

/// Quadrature kernel pair for one mel channel: superposed cosines (real)
/// and sines (imaginary), optionally tapered.
#[derive(Debug, Clone, PartialEq)]
pub struct MelWaveKernel {
    pub channel_index: usize,
    pub real_kernel: Vec<f64>,
    pub imag_kernel: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl MelWaveKernel {
    pub fn len(&self) -> usize {
        self.real_kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.real_kernel.is_empty()
    }
}

/// Superpose the channel's components into a kernel pair of
/// `round(kernel_ms * fs / 1000)` samples:
/// imag(n) = taper(n) * sum_i p_i * sin(2 pi f_i n / fs), real likewise
/// with cosines.
pub fn synthesize_mel_wave(
    channel_index: usize,
    components: &[Component],
    sample_rate_hz: u32,
    cfg: &TmfwcConfig,
) -> Result<MelWaveKernel, TmfwcError> {
    cfg.validate()?;
    if components.is_empty() {
        return Err(TmfwcError::EmptySupport { channel: channel_index });
    }
    let nyquist = sample_rate_hz as f64 / 2.0;
    for c in components {
        if c.freq_hz >= nyquist {
            return Err(TmfwcError::AliasedComponent { freq_hz: c.freq_hz, nyquist_hz: nyquist });
        }
    }
    let len = ((cfg.kernel_ms * sample_rate_hz as f64 / 1000.0).round() as usize).max(1);
    let mut real_kernel = Vec::with_capacity(len);
    let mut imag_kernel = Vec::with_capacity(len);
    for n in 0..len {
        let taper = match cfg.taper {
            Taper::None => 1.0,
            Taper::Hann => {
                if len < 2 {
                    1.0
                } else {
                    0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos())
                }
            }
        };
        let mut re = 0.0;
        let mut im = 0.0;
        for c in components {
            let phase = 2.0 * std::f64::consts::PI * c.freq_hz * n as f64 / sample_rate_hz as f64;
            re += c.parameter * phase.cos();
            im += c.parameter * phase.sin();
        }
        real_kernel.push(taper * re);
        imag_kernel.push(taper * im);
    }
    Ok(MelWaveKernel { channel_index, real_kernel, imag_kernel, sample_rate_hz })
}

/// Direct FIR convolution of the buffer with both kernel parts, "same"
/// alignment (output length = input length, kernel centered). Exactly
/// `2 * kernel_len * signal_len` multiply-accumulates are performed and
/// recorded.
pub fn convolve_channel(
    buf: &AudioBuffer,
    kernel: &MelWaveKernel,
) -> Result<(Vec<f64>, Vec<f64>), TmfwcError> {
    if buf.sample_rate_hz() != kernel.sample_rate_hz {
        return Err(TmfwcError::SampleRateMismatch {
            buffer_hz: buf.sample_rate_hz(),
            kernel_hz: kernel.sample_rate_hz,
        });
    }
    let n = buf.len();
    let l = kernel.len();
    // zero-pad so every output sees a full kernel width of taps
    let mut padded = vec![0.0; n + 2 * (l - 1).max(1)];
    padded[l - 1..l - 1 + n].copy_from_slice(buf.samples());

    // true convolution y[m] = sum_k h[k] x[m - k]; with the kernel
    // reversed it becomes a forward dot product over a padded window
    let rev = |k: &[f64]| -> Vec<f64> { k.iter().rev().copied().collect() };
    let real_rev = rev(&kernel.real_kernel);
    let imag_rev = rev(&kernel.imag_kernel);
    let offset = (l - 1) / 2; // "same" alignment for centered output

    let mut real_resp = Vec::with_capacity(n);
    let mut imag_resp = Vec::with_capacity(n);
    let mut macs = 0u64;
    for out_idx in 0..n {
        let window = &padded[out_idx + offset..out_idx + offset + l];
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &x) in window.iter().enumerate() {
            re += real_rev[j] * x;
            im += imag_rev[j] * x;
            macs += 2;
        }
        real_resp.push(re);
        imag_resp.push(im);
    }
    metrics::record_macs(macs);
    Ok((real_resp, imag_resp))
}

/// Pointwise magnitude sqrt(real^2 + imag^2) of a quadrature response pair.
pub fn magnitude_envelope(real_resp: &[f64], imag_resp: &[f64]) -> Result<Vec<f64>, TmfwcError> {
    if real_resp.len() != imag_resp.len() {
        return Err(TmfwcError::DimensionMismatch(format!(
            "real response {} samples, imaginary {}",
            real_resp.len(),
            imag_resp.len()
        )));
    }
    Ok(real_resp.iter().zip(imag_resp).map(|(r, i)| (r * r + i * i).sqrt()).collect())
}

/// Non-overlapping absolute max-pooling: each window keeps its element of
/// largest magnitude, sign preserved; a final partial window is pooled
/// as-is. Output length is ceil(len / window).
pub fn abs_max_pool(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "pool window must be >= 1");
    values
        .chunks(window)
        .map(|chunk| {
            let mut best = chunk[0];
            for &v in &chunk[1..] {
                if v.abs() > best.abs() {
                    best = v;
                }
            }
            best
        })
        .collect()
}

/// Synthesize the kernels for every channel of a component table.
pub fn synthesize_filterbank(
    table: &MelComponentTable,
    sample_rate_hz: u32,
    cfg: &TmfwcConfig,
) -> Result<Vec<MelWaveKernel>, TmfwcError> {
    (0..table.num_channels())
        .map(|m| synthesize_mel_wave(m, table.channel(m), sample_rate_hz, cfg))
        .collect()
}

/// TMFWC extraction without the final normalization: convolve each
/// channel, take magnitudes, max-pool, stack pooled sequences as columns.
pub fn tmfwc_extract_raw(
    buf: &AudioBuffer,
    kernels: &[MelWaveKernel],
    cfg: &TmfwcConfig,
) -> Result<FeatureMatrix, TmfwcError> {
    cfg.validate()?;
    if kernels.is_empty() {
        return Err(TmfwcError::InvalidConfig("no kernels".into()));
    }
    let pool = cfg.pool_window_samples(buf.sample_rate_hz());
    let rows = buf.len().div_ceil(pool);
    let mut matrix = FeatureMatrix::zeros(rows, kernels.len());
    for (col, kernel) in kernels.iter().enumerate() {
        let (re, im) = convolve_channel(buf, kernel)?;
        let env = magnitude_envelope(&re, &im)?;
        let pooled = abs_max_pool(&env, pool);
        debug_assert_eq!(pooled.len(), rows);
        for (row, v) in pooled.into_iter().enumerate() {
            matrix.set(row, col, v);
        }
    }
    Ok(matrix)
}

/// Full TMFWC extraction: [`tmfwc_extract_raw`] followed by per-utterance
/// max-normalization of the whole matrix to [0, 1].
pub fn tmfwc_extract(
    buf: &AudioBuffer,
    spec: &MelFilterbankSpec,
    cfg: &TmfwcConfig,
    table: &MelComponentTable,
) -> Result<FeatureMatrix, TmfwcError> {
    if table.num_channels() != cfg.num_channels {
        return Err(TmfwcError::InvalidConfig(format!(
            "table has {} channels, config expects {}",
            table.num_channels(),
            cfg.num_channels
        )));
    }
    if buf.sample_rate_hz() != spec.sample_rate_hz {
        return Err(TmfwcError::SampleRateMismatch {
            buffer_hz: buf.sample_rate_hz(),
            kernel_hz: spec.sample_rate_hz,
        });
    }
    let kernels = synthesize_filterbank(table, spec.sample_rate_hz, cfg)?;
    let raw = tmfwc_extract_raw(buf, &kernels, cfg)?;
    Ok(normalize_to_unit_max(raw))
}

/// Divide the whole matrix by its maximum value (no-op on all-zero input).
pub fn normalize_to_unit_max(mut m: FeatureMatrix) -> FeatureMatrix {
    let max = m.max_value();
    if max > 0.0 {
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                m.set(r, c, m.get(r, c) / max);
            }
        }
    }
    m
}

/// Column names ch1..chN for a TMFWC feature matrix.
pub fn tmfwc_column_names(num_channels: usize) -> Vec<String> {
    (1..=num_channels).map(|c| format!("ch{c}")).collect()
}

/// The published channel-1 component table plus nine derived channels on
/// the mel geometry fitted to it (left edge 121 Hz, peak 161 Hz), each
/// rescaled to the published peak parameter. This mirrors the repository's
/// `data/table1.csv`.
pub fn table1_style_bank() -> Result<MelComponentTable, TmfwcError> {
    let published = [
        (131.0, 0.002454697),
        (141.0, 0.004909393),
        (151.0, 0.00736409),
        (161.0, 0.009818787),
        (171.0, 0.007781114),
        (181.0, 0.00561907),
        (191.0, 0.003457026),
        (201.0, 0.001294982),
    ];
    let peak_param = 0.009818787;
    let mel = |f: f64| crate::mfcc::hz_to_mel(f).expect("non-negative");
    let mel_inv = |m: f64| crate::mfcc::mel_to_hz(m).expect("non-negative");
    let left = 121.0;
    let step = mel(161.0) - mel(left);
    // 12 mel-uniform edges starting at the fitted channel-1 left edge
    let edges: Vec<f64> = (0..=11).map(|i| mel_inv(mel(left) + step * i as f64)).collect();
    let mut channels: Vec<Vec<Component>> = Vec::with_capacity(10);
    channels.push(
        published
            .into_iter()
            .map(|(freq_hz, parameter)| Component { freq_hz, parameter })
            .collect(),
    );
    for m in 1..10 {
        let (l, p, r) = (edges[m], edges[m + 1], edges[m + 2]);
        let mut comps = Vec::new();
        let mut k = 1usize;
        loop {
            let f = l + 10.0 * k as f64;
            if f >= r {
                break;
            }
            let w = if f <= p { (f - l) / (p - l) } else { (r - f) / (r - p) };
            if w > 0.0 {
                comps.push(Component { freq_hz: f, parameter: w * peak_param });
            }
            k += 1;
        }
        channels.push(comps);
    }
    MelComponentTable::new(channels)
}
