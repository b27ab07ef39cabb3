//! Experiment protocol: dataset ingestion, stratified splitting,
//! extractor dispatch, the multi-seed digit/speaker evaluation, the
//! extraction-cost benchmark, and report emission.

mod bench;
mod cache;
mod dataset;
mod experiment;
mod extractor;
mod report;
mod split;
pub mod synthetic;

pub use bench::{benchmark_extraction, BenchOptions};
pub use cache::FeatureCache;
pub use dataset::{load_dataset, DatasetLayout, LoadedDataset, Utterance};
pub use experiment::{
    evaluate_model, extract_all, run_experiment, run_experiment_with_models, AccuracyRow,
    ExperimentConfig, ExperimentModel, ResultTable, TimingRow,
};
pub use extractor::{extract_features, ExtractorConfig, ExtractorKind, PreparedExtractor};
pub use report::emit_report;
pub use split::{stratified_split, SplitConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Audio(#[from] crate::audio::AudioError),
    #[error(transparent)]
    Mfcc(#[from] crate::mfcc::MfccError),
    #[error(transparent)]
    Tmfwc(#[from] crate::tmfwc::TmfwcError),
    #[error(transparent)]
    Wavelet(#[from] crate::wavelet::WaveletError),
    #[error(transparent)]
    Reservoir(#[from] crate::reservoir::ReservoirError),
    #[error(transparent)]
    FeatureIo(#[from] crate::features::FeatureIoError),
    #[error("empty dataset under {0}")]
    EmptyDataset(std::path::PathBuf),
    #[error("duplicate utterance id {0}")]
    DuplicateId(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("empty cell: no utterance for digit {digit}, speaker {speaker}")]
    EmptyCell { digit: u8, speaker: String },
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
}
