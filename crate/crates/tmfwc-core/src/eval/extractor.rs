//! Extractor dispatch: one configuration type covering the three feature
//! paths, plus a prepared form that pre-builds whatever is static per
//! configuration (TMFWC kernels, the mel filterbank).

use crate::audio::AudioBuffer;
use crate::features::FeatureMatrix;
use crate::mfcc::{
    build_mel_filterbank, mfcc_column_names, mfcc_pipeline_with_bank, MelFilterbank,
    MelFilterbankSpec, MfccConfig,
};
use crate::tmfwc::{
    abs_max_pool, derive_component_table, normalize_to_unit_max, synthesize_filterbank,
    tmfwc_column_names, tmfwc_extract_raw, MelComponentTable, MelWaveKernel, TmfwcConfig,
};
use crate::wavelet::{dwt_multilevel, WaveletSpec};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Tmfwc,
    Mfcc,
    Dwt,
}

impl ExtractorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExtractorKind::Tmfwc => "tmfwc",
            ExtractorKind::Mfcc => "mfcc",
            ExtractorKind::Dwt => "dwt",
        }
    }
}

impl std::fmt::Display for ExtractorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed to turn audio into features, serializable so runs
/// are reproducible from their resolved configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExtractorConfig {
    pub kind: ExtractorKind,
    pub sample_rate_hz: u32,
    /// Mel band shared by the MFCC bank and (with `tmfwc.num_channels`
    /// filters) the TMFWC component derivation.
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub fft_size: usize,
    pub num_mel_filters: usize,
    pub mfcc: MfccConfig,
    pub tmfwc: TmfwcConfig,
    /// Verbatim component table; when absent the table is derived from
    /// the mel geometry.
    pub tmfwc_table: Option<MelComponentTable>,
    pub wavelet: WaveletSpec,
    /// Pooling interval for the wavelet feature path.
    pub dwt_pool_ms: f64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        Self {
            kind: ExtractorKind::Tmfwc,
            sample_rate_hz: 8000,
            f_min_hz: 0.0,
            f_max_hz: 4000.0,
            fft_size: 1024,
            num_mel_filters: 25,
            mfcc: MfccConfig::default(),
            tmfwc: TmfwcConfig::default(),
            tmfwc_table: None,
            wavelet: WaveletSpec::default(),
            dwt_pool_ms: 8.0,
        }
    }
}

impl ExtractorConfig {
    pub fn mfcc_bank_spec(&self) -> MelFilterbankSpec {
        MelFilterbankSpec {
            num_filters: self.num_mel_filters,
            f_min_hz: self.f_min_hz,
            f_max_hz: self.f_max_hz,
            fft_size: self.fft_size,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn tmfwc_bank_spec(&self) -> MelFilterbankSpec {
        MelFilterbankSpec { num_filters: self.tmfwc.num_channels, ..self.mfcc_bank_spec() }
    }

    /// Canonical JSON form, the cache-key ingredient.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("extractor config serializes")
    }

    /// Feature column names for this extractor.
    pub fn column_names(&self) -> Vec<String> {
        match self.kind {
            ExtractorKind::Tmfwc => tmfwc_column_names(self.tmfwc.num_channels),
            ExtractorKind::Mfcc => mfcc_column_names(&self.mfcc),
            ExtractorKind::Dwt => {
                let mut names: Vec<String> =
                    (1..=self.wavelet.levels).map(|l| format!("d{l}")).collect();
                names.push("a".to_string());
                names
            }
        }
    }
}

/// An extractor with its static parts built: TMFWC kernels synthesized,
/// the MFCC filterbank quantized.
pub struct PreparedExtractor {
    cfg: ExtractorConfig,
    kernels: Vec<MelWaveKernel>,
    bank: Option<MelFilterbank>,
}

impl PreparedExtractor {
    pub fn new(cfg: &ExtractorConfig) -> Result<Self, EvalError> {
        let mut kernels = Vec::new();
        let mut bank = None;
        match cfg.kind {
            ExtractorKind::Tmfwc => {
                let table = match &cfg.tmfwc_table {
                    Some(t) => {
                        if t.num_channels() != cfg.tmfwc.num_channels {
                            return Err(EvalError::ConfigInvalid(format!(
                                "component table has {} channels, config expects {}",
                                t.num_channels(),
                                cfg.tmfwc.num_channels
                            )));
                        }
                        t.clone()
                    }
                    None => derive_component_table(
                        &cfg.tmfwc_bank_spec(),
                        cfg.tmfwc.component_spacing_hz,
                    )?,
                };
                kernels = synthesize_filterbank(&table, cfg.sample_rate_hz, &cfg.tmfwc)?;
            }
            ExtractorKind::Mfcc => {
                bank = Some(build_mel_filterbank(&cfg.mfcc_bank_spec())?);
            }
            ExtractorKind::Dwt => {}
        }
        Ok(Self { cfg: cfg.clone(), kernels, bank })
    }

    pub fn config(&self) -> &ExtractorConfig {
        &self.cfg
    }

    pub fn kind(&self) -> ExtractorKind {
        self.cfg.kind
    }

    /// Run the configured feature path on one buffer.
    pub fn extract(&self, buf: &AudioBuffer) -> Result<FeatureMatrix, EvalError> {
        if buf.sample_rate_hz() != self.cfg.sample_rate_hz {
            return Err(EvalError::ConfigInvalid(format!(
                "utterance at {} Hz, extractor configured for {} Hz (resampling is unsupported)",
                buf.sample_rate_hz(),
                self.cfg.sample_rate_hz
            )));
        }
        match self.cfg.kind {
            ExtractorKind::Tmfwc => {
                let raw = tmfwc_extract_raw(buf, &self.kernels, &self.cfg.tmfwc)?;
                Ok(normalize_to_unit_max(raw))
            }
            ExtractorKind::Mfcc => {
                let spec = self.cfg.mfcc_bank_spec();
                let bank = self.bank.as_ref().expect("prepared mfcc bank");
                Ok(mfcc_pipeline_with_bank(buf, bank, &spec, &self.cfg.mfcc)?)
            }
            ExtractorKind::Dwt => dwt_features(buf, &self.cfg.wavelet, self.cfg.dwt_pool_ms),
        }
    }
}

/// One-shot extraction without reusing prepared state.
pub fn extract_features(
    buf: &AudioBuffer,
    cfg: &ExtractorConfig,
) -> Result<FeatureMatrix, EvalError> {
    PreparedExtractor::new(cfg)?.extract(buf)
}

/// Wavelet baseline features: multi-level decomposition, each band's
/// absolute coefficients pooled onto a common time grid (one column per
/// band, approx last), max-normalized like the TMFWC matrix.
fn dwt_features(
    buf: &AudioBuffer,
    spec: &WaveletSpec,
    pool_ms: f64,
) -> Result<FeatureMatrix, EvalError> {
    let len = buf.len();
    let max_levels = if len < 2 { 0 } else { len.ilog2() as usize };
    let effective_levels = spec.levels.min(max_levels).max(1);
    let effective = WaveletSpec { levels: effective_levels, ..*spec };
    let dec = dwt_multilevel(buf.samples(), &effective)?;

    let pool_samples = ((pool_ms * buf.sample_rate_hz() as f64 / 1000.0).round() as usize).max(1);
    let rows = len.div_ceil(pool_samples).max(1);

    // column layout is fixed by the configured level count so every
    // utterance yields the same width: details 1..levels, then approx
    let mut matrix = FeatureMatrix::zeros(rows, spec.levels + 1);
    let mut place = |col: usize, band: &[f64]| {
        let window = band.len().div_ceil(rows).max(1);
        let mut pooled: Vec<f64> = abs_max_pool(band, window).into_iter().map(f64::abs).collect();
        pooled.resize(rows, 0.0);
        for (row, v) in pooled.into_iter().enumerate() {
            matrix.set(row, col, v);
        }
    };
    for (level, band) in dec.details.iter().enumerate() {
        place(level, band);
    }
    place(spec.levels, &dec.approx);
    Ok(normalize_to_unit_max(matrix))
}
