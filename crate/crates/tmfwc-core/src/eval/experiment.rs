//! The multi-seed digit/speaker evaluation protocol.
//!
//! One feature extraction pass is shared by every reservoir seed. Per
//! seed: build the reservoir, summarize every utterance, train digit and
//! speaker ridge readouts on the train split, score the test split.
//! Summaries are keyed and sorted by utterance id before solving, so
//! presentation order cannot change any result.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::audio::load_wav;
use crate::features::FeatureMatrix;
use crate::reservoir::{
    train_multitask, Reservoir, ReservoirModel, ReservoirParams, StateSummary, TaskLabel,
};

use super::{
    EvalError, ExtractorConfig, ExtractorKind, FeatureCache, PreparedExtractor, SplitConfig,
    Utterance,
};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub extractor: ExtractorConfig,
    pub split: SplitConfig,
    pub n_reservoir_seeds: usize,
    pub reservoir: ReservoirParams,
    pub ridge_lambda: f64,
    /// Worker cap for feature extraction and reservoir runs; 1 forces the
    /// fully serial path, 0 uses the rayon default.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            extractor: ExtractorConfig::default(),
            split: SplitConfig::default(),
            n_reservoir_seeds: 10,
            reservoir: ReservoirParams::default(),
            ridge_lambda: 1e-6,
            threads: 0,
        }
    }
}

/// One accuracy measurement: task x extractor x reservoir seed.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccuracyRow {
    pub task: TaskLabel,
    pub extractor: ExtractorKind,
    pub seed: u64,
    pub accuracy: f64,
}

/// One extraction-cost measurement for an extractor path.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimingRow {
    pub extractor: ExtractorKind,
    pub utterances: usize,
    pub repetitions: usize,
    pub median_s_per_utterance: f64,
    pub total_macs: u64,
    pub total_transform_calls: u64,
}

/// Everything a run produced: accuracy rows, timing rows, or both.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResultTable {
    pub accuracy: Vec<AccuracyRow>,
    pub timing: Vec<TimingRow>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.accuracy.is_empty() && self.timing.is_empty()
    }

    /// Mean and population standard deviation per (task, extractor),
    /// ordered for stable output.
    pub fn accuracy_aggregates(&self) -> Vec<(TaskLabel, ExtractorKind, f64, f64, usize)> {
        let mut groups: BTreeMap<(TaskLabel, String), Vec<f64>> = BTreeMap::new();
        let mut kinds: BTreeMap<(TaskLabel, String), ExtractorKind> = BTreeMap::new();
        for row in &self.accuracy {
            let key = (row.task, row.extractor.as_str().to_string());
            groups.entry(key.clone()).or_default().push(row.accuracy);
            kinds.insert(key, row.extractor);
        }
        groups
            .into_iter()
            .map(|(key, values)| {
                let n = values.len();
                let mean = values.iter().sum::<f64>() / n as f64;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
                (key.0, kinds[&key], mean, var.sqrt(), n)
            })
            .collect()
    }

    pub fn save_json(&self, path: &Path) -> Result<(), EvalError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Model artifact written by training: per-seed reservoir readouts plus
/// the extractor configuration and speaker vocabulary needed to evaluate
/// new data.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentModel {
    pub extractor: ExtractorConfig,
    pub ridge_lambda: f64,
    pub speaker_labels: Vec<String>,
    pub models: Vec<ReservoirModel>,
}

impl ExperimentModel {
    pub fn save_json(&self, path: &Path) -> Result<(), EvalError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn run_maybe_parallel<T, F>(items: &[Utterance], threads: usize, f: F) -> Result<Vec<T>, EvalError>
where
    T: Send,
    F: Fn(&Utterance) -> Result<T, EvalError> + Sync + Send,
{
    if threads == 1 {
        items.iter().map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| EvalError::ConfigInvalid(format!("thread pool: {e}")))?;
        pool.install(|| items.par_iter().map(f).collect())
    }
}

/// Extract features for every utterance, via the cache when provided.
/// Returns (id -> features), detached from presentation order.
pub fn extract_all(
    data: &[Utterance],
    cfg: &ExtractorConfig,
    cache: Option<&FeatureCache>,
    threads: usize,
) -> Result<BTreeMap<String, FeatureMatrix>, EvalError> {
    let prepared = PreparedExtractor::new(cfg)?;
    let pairs = run_maybe_parallel(data, threads, |u| {
        let features = match cache {
            Some(cache) => {
                let bytes = std::fs::read(&u.path).map_err(|e| {
                    EvalError::Io(std::io::Error::other(format!("{}: {e}", u.path.display())))
                })?;
                let key = FeatureCache::key(&bytes, cfg);
                match cache.get(&key) {
                    Some(hit) => hit,
                    None => {
                        let computed = prepared.extract(&crate::audio::decode_wav(&bytes)?)?;
                        cache.put(&key, &computed)?;
                        computed
                    }
                }
            }
            None => prepared.extract(&load_wav(&u.path)?)?,
        };
        Ok((u.id.clone(), features))
    })?;
    Ok(pairs.into_iter().collect())
}

fn speaker_vocabulary(data: &[Utterance]) -> Vec<String> {
    let mut speakers: Vec<String> = data.iter().map(|u| u.speaker_label.clone()).collect();
    speakers.sort();
    speakers.dedup();
    speakers
}

fn summarize_all(
    reservoir: &Reservoir,
    data: &[Utterance],
    features: &BTreeMap<String, FeatureMatrix>,
    threads: usize,
) -> Result<Vec<(String, StateSummary)>, EvalError> {
    let mut out = run_maybe_parallel(data, threads, |u| {
        let feats = features
            .get(&u.id)
            .ok_or_else(|| EvalError::ConfigInvalid(format!("no features for {}", u.id)))?;
        Ok((u.id.clone(), reservoir.run_sequence(feats)?))
    })?;
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

struct SeedOutcome {
    digit_accuracy: f64,
    speaker_accuracy: f64,
    model: ReservoirModel,
}

fn run_one_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    input_dim: usize,
    train: &[Utterance],
    test: &[Utterance],
    features: &BTreeMap<String, FeatureMatrix>,
    speakers: &[String],
) -> Result<SeedOutcome, EvalError> {
    let params = ReservoirParams { seed, ..cfg.reservoir.clone() };
    let reservoir = Reservoir::new(&params, input_dim)?;

    let speaker_class = |label: &str| -> usize {
        speakers.iter().position(|s| s == label).expect("speaker in vocabulary")
    };

    let train_summaries = summarize_all(&reservoir, train, features, cfg.threads)?;
    let by_id: BTreeMap<&str, &Utterance> = train.iter().map(|u| (u.id.as_str(), u)).collect();
    let summaries: Vec<StateSummary> = train_summaries.iter().map(|(_, s)| s.clone()).collect();
    let digit_labels: Vec<usize> =
        train_summaries.iter().map(|(id, _)| by_id[id.as_str()].digit_label as usize).collect();
    let speaker_labels: Vec<usize> = train_summaries
        .iter()
        .map(|(id, _)| speaker_class(&by_id[id.as_str()].speaker_label))
        .collect();

    let mut tasks = BTreeMap::new();
    tasks.insert(TaskLabel::Digit, digit_labels);
    tasks.insert(TaskLabel::Speaker, speaker_labels);
    let readouts = train_multitask(&summaries, &tasks, cfg.ridge_lambda)?;

    let test_summaries = summarize_all(&reservoir, test, features, cfg.threads)?;
    let test_by_id: BTreeMap<&str, &Utterance> = test.iter().map(|u| (u.id.as_str(), u)).collect();
    let mut digit_hits = 0usize;
    let mut speaker_hits = 0usize;
    for (id, summary) in &test_summaries {
        let u = test_by_id[id.as_str()];
        let (digit_pred, _) = readouts[&TaskLabel::Digit].classify(summary)?;
        if digit_pred == u.digit_label as usize {
            digit_hits += 1;
        }
        let (speaker_pred, _) = readouts[&TaskLabel::Speaker].classify(summary)?;
        if speaker_pred == speaker_class(&u.speaker_label) {
            speaker_hits += 1;
        }
    }
    let n_test = test.len().max(1);

    Ok(SeedOutcome {
        digit_accuracy: digit_hits as f64 / n_test as f64,
        speaker_accuracy: speaker_hits as f64 / n_test as f64,
        model: ReservoirModel { params, input_dim, readouts },
    })
}

/// Run the full protocol and return per-seed accuracies plus the trained
/// per-seed models.
pub fn run_experiment_with_models(
    cfg: &ExperimentConfig,
    data: &[Utterance],
    cache: Option<&FeatureCache>,
) -> Result<(ResultTable, ExperimentModel), EvalError> {
    if cfg.n_reservoir_seeds == 0 {
        return Err(EvalError::ConfigInvalid("n_reservoir_seeds must be >= 1".into()));
    }
    let digits: std::collections::BTreeSet<u8> = data.iter().map(|u| u.digit_label).collect();
    let speakers = speaker_vocabulary(data);
    if digits.len() < 2 || speakers.len() < 2 {
        return Err(EvalError::ConfigInvalid(format!(
            "dataset must cover >= 2 digits and >= 2 speakers (got {} digits, {} speakers)",
            digits.len(),
            speakers.len()
        )));
    }

    let features = extract_all(data, &cfg.extractor, cache, cfg.threads)?;
    let input_dim = features.values().next().map_or(0, FeatureMatrix::cols);
    if features.values().any(|f| f.cols() != input_dim) {
        return Err(EvalError::ConfigInvalid("inconsistent feature widths across dataset".into()));
    }

    let (train, test) = super::stratified_split(data, &cfg.split)?;
    if test.is_empty() {
        return Err(EvalError::ConfigInvalid("split produced an empty test set".into()));
    }

    let mut table = ResultTable::default();
    let mut models = Vec::with_capacity(cfg.n_reservoir_seeds);
    for i in 0..cfg.n_reservoir_seeds {
        let seed = cfg.reservoir.seed.wrapping_add(i as u64);
        let outcome = run_one_seed(cfg, seed, input_dim, &train, &test, &features, &speakers)?;
        table.accuracy.push(AccuracyRow {
            task: TaskLabel::Digit,
            extractor: cfg.extractor.kind,
            seed,
            accuracy: outcome.digit_accuracy,
        });
        table.accuracy.push(AccuracyRow {
            task: TaskLabel::Speaker,
            extractor: cfg.extractor.kind,
            seed,
            accuracy: outcome.speaker_accuracy,
        });
        models.push(outcome.model);
    }
    table.accuracy.sort_by(|a, b| {
        (a.task, a.extractor.as_str(), a.seed).cmp(&(b.task, b.extractor.as_str(), b.seed))
    });

    let model = ExperimentModel {
        extractor: cfg.extractor.clone(),
        ridge_lambda: cfg.ridge_lambda,
        speaker_labels: speakers,
        models,
    };
    Ok((table, model))
}

/// Train/evaluate across seeds; the accuracy table alone.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    data: &[Utterance],
    cache: Option<&FeatureCache>,
) -> Result<ResultTable, EvalError> {
    run_experiment_with_models(cfg, data, cache).map(|(table, _)| table)
}

/// Score a saved model on a dataset (the whole dataset acts as the test
/// set). Speakers unseen at training time count as errors.
pub fn evaluate_model(
    model: &ExperimentModel,
    data: &[Utterance],
    cache: Option<&FeatureCache>,
    threads: usize,
) -> Result<ResultTable, EvalError> {
    let features = extract_all(data, &model.extractor, cache, threads)?;
    let mut table = ResultTable::default();
    for reservoir_model in &model.models {
        let input_dim = features.values().next().map_or(0, FeatureMatrix::cols);
        if input_dim != reservoir_model.input_dim {
            return Err(EvalError::ConfigInvalid(format!(
                "extractor produces {input_dim}-dim features but the model was trained on {}",
                reservoir_model.input_dim
            )));
        }
        let reservoir = Reservoir::new(&reservoir_model.params, reservoir_model.input_dim)?;
        let summaries = summarize_all(&reservoir, data, &features, threads)?;
        let by_id: BTreeMap<&str, &Utterance> = data.iter().map(|u| (u.id.as_str(), u)).collect();
        for (&task, readout) in &reservoir_model.readouts {
            let mut hits = 0usize;
            for (id, summary) in &summaries {
                let u = by_id[id.as_str()];
                let (pred, _) = readout.classify(summary)?;
                let actual = match task {
                    TaskLabel::Digit => Some(u.digit_label as usize),
                    TaskLabel::Speaker => {
                        model.speaker_labels.iter().position(|s| s == &u.speaker_label)
                    }
                };
                if actual == Some(pred) {
                    hits += 1;
                }
            }
            table.accuracy.push(AccuracyRow {
                task,
                extractor: model.extractor.kind,
                seed: reservoir_model.params.seed,
                accuracy: hits as f64 / data.len().max(1) as f64,
            });
        }
    }
    table.accuracy.sort_by(|a, b| {
        (a.task, a.extractor.as_str(), a.seed).cmp(&(b.task, b.extractor.as_str(), b.seed))
    });
    Ok(table)
}

/// Single-threaded wall-clock measurement helper used by the benchmark.
pub(super) fn time_extraction_pass(
    prepared: &PreparedExtractor,
    buffers: &[crate::audio::AudioBuffer],
) -> Result<f64, EvalError> {
    let start = Instant::now();
    for buf in buffers {
        let _ = prepared.extract(buf)?;
    }
    Ok(start.elapsed().as_secs_f64())
}
