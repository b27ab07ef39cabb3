//! Config-file loading, resolved-config echoing, and the error-to-exit-code
//! mapping.
//!
//! The JSON config mirrors the library configuration types; every field
//! has a default, so partial files are fine. Flags override file values,
//! and the fully merged configuration is echoed into each output
//! directory as `resolved_config.json` (component tables inlined) so a
//! run is reproducible from that file plus the dataset.

use std::path::{Path, PathBuf};

use tmfwc_core::audio::AudioError;
use tmfwc_core::eval::{BenchOptions, DatasetLayout, EvalError, ExtractorConfig, SplitConfig};
use tmfwc_core::mfcc::MfccError;
use tmfwc_core::reservoir::{ReservoirError, ReservoirParams};
use tmfwc_core::tmfwc::{MelComponentTable, TmfwcError};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(message: String) -> Self {
        Self { code: 1, message }
    }

    pub fn config(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn data(message: String) -> Self {
        Self { code: 3, message }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let message = e.to_string();
        match e {
            EvalError::Io(_) | EvalError::FeatureIo(_) => CliError::io(message),
            EvalError::ConfigInvalid(_) | EvalError::Serde(_) => CliError::config(message),
            EvalError::Audio(a) => CliError { code: audio_code(&a), message },
            EvalError::Mfcc(m) => CliError { code: mfcc_code(&m), message },
            EvalError::Tmfwc(t) => CliError { code: tmfwc_code(&t), message },
            EvalError::Reservoir(r) => CliError { code: reservoir_code(&r), message },
            EvalError::Wavelet(_)
            | EvalError::EmptyDataset(_)
            | EvalError::DuplicateId(_)
            | EvalError::Manifest(_)
            | EvalError::EmptyCell { .. } => CliError::data(message),
        }
    }
}

fn audio_code(e: &AudioError) -> u8 {
    match e {
        AudioError::Io { .. } => 1,
        AudioError::InvalidFraming(_) => 2,
        AudioError::MalformedContainer(_)
        | AudioError::UnsupportedEncoding(_)
        | AudioError::EmptyAudio => 3,
    }
}

fn mfcc_code(e: &MfccError) -> u8 {
    match e {
        MfccError::Audio(a) => audio_code(a),
        MfccError::SampleRateMismatch { .. } => 3,
        _ => 2,
    }
}

fn tmfwc_code(e: &TmfwcError) -> u8 {
    match e {
        TmfwcError::Io(_) => 1,
        TmfwcError::SampleRateMismatch { .. } => 3,
        TmfwcError::Spec(m) => mfcc_code(m),
        _ => 2,
    }
}

fn reservoir_code(e: &ReservoirError) -> u8 {
    match e {
        ReservoirError::Io(_) => 1,
        ReservoirError::InsufficientData(_) => 3,
        _ => 2,
    }
}

impl From<AudioError> for CliError {
    fn from(e: AudioError) -> Self {
        CliError { code: audio_code(&e), message: e.to_string() }
    }
}

impl From<MfccError> for CliError {
    fn from(e: MfccError) -> Self {
        CliError { code: mfcc_code(&e), message: e.to_string() }
    }
}

impl From<TmfwcError> for CliError {
    fn from(e: TmfwcError) -> Self {
        CliError { code: tmfwc_code(&e), message: e.to_string() }
    }
}

impl From<ReservoirError> for CliError {
    fn from(e: ReservoirError) -> Self {
        CliError { code: reservoir_code(&e), message: e.to_string() }
    }
}

/// The merged tool configuration. Serialized verbatim (plus the command
/// and inlined table) as `resolved_config.json`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct FileConfig {
    pub extractor: ExtractorConfig,
    pub split: SplitConfig,
    pub n_reservoir_seeds: usize,
    pub reservoir: ReservoirParams,
    pub ridge_lambda: f64,
    pub threads: usize,
    pub layout: DatasetLayout,
    pub bench: BenchOptions,
    /// Convenience alternative to the inline `extractor.tmfwc_table`;
    /// loaded and inlined at resolve time.
    pub table_path: Option<PathBuf>,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            extractor: ExtractorConfig::default(),
            split: SplitConfig::default(),
            n_reservoir_seeds: 10,
            reservoir: ReservoirParams::default(),
            ridge_lambda: 1e-6,
            threads: 0,
            layout: DatasetLayout::AudioMnist,
            bench: BenchOptions::default(),
            table_path: None,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
        let mut cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("parsing {}: {e}", path.display())))?;
        if let Some(table_path) = cfg.table_path.take() {
            let resolved = if table_path.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(&table_path)
            } else {
                table_path
            };
            let table = MelComponentTable::read_csv(&resolved).map_err(CliError::from)?;
            cfg.extractor.tmfwc.num_channels = table.num_channels();
            cfg.extractor.tmfwc_table = Some(table);
        }
        Ok(cfg)
    }

    /// Echo the fully resolved configuration into `out`.
    pub fn write_resolved(&self, command: &str, out: &Path) -> Result<(), CliError> {
        let doc = serde_json::json!({
            "command": command,
            "config": self,
        });
        let path = out.join("resolved_config.json");
        std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("config serializes"))
            .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
        Ok(())
    }
}
