//! End-to-end experiment protocol checks on small synthetic corpora.

use std::path::Path;

use tmfwc_core::audio::{write_wav_pcm16, AudioBuffer};
use tmfwc_core::eval::synthetic::{generate_synthetic_dataset, SyntheticSpec};
use tmfwc_core::eval::{
    run_experiment, ExperimentConfig, ExtractorConfig, ExtractorKind, FeatureCache, SplitConfig,
    Utterance,
};
use tmfwc_core::reservoir::ReservoirParams;
use tmfwc_core::tmfwc::{table1_style_bank, MelComponentTable};

fn small_corpus(dir: &Path) -> Vec<Utterance> {
    let spec = SyntheticSpec { speakers: 2, digits: 3, takes: 5, ..SyntheticSpec::default() };
    generate_synthetic_dataset(dir, &spec).unwrap()
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        reservoir: ReservoirParams { n_nodes: 60, ..ReservoirParams::default() },
        n_reservoir_seeds: 2,
        ..ExperimentConfig::default()
    }
}

#[test]
fn feature_cache_is_semantically_invisible() {
    let data_dir = tempfile::tempdir().unwrap();
    let data = small_corpus(data_dir.path());
    let cfg = small_config();

    let uncached = run_experiment(&cfg, &data, None).unwrap();

    let cache_dir = tempfile::tempdir().unwrap();
    let cache = FeatureCache::open_at(cache_dir.path()).unwrap();
    let cold = run_experiment(&cfg, &data, Some(&cache)).unwrap();
    assert!(std::fs::read_dir(cache_dir.path()).unwrap().count() > 0);
    let warm = run_experiment(&cfg, &data, Some(&cache)).unwrap();

    assert_eq!(uncached, cold);
    assert_eq!(uncached, warm);
}

#[test]
fn presentation_order_does_not_change_results() {
    let data_dir = tempfile::tempdir().unwrap();
    let data = small_corpus(data_dir.path());
    let cfg = small_config();
    let forward = run_experiment(&cfg, &data, None).unwrap();
    let mut reversed = data.clone();
    reversed.reverse();
    let backward = run_experiment(&cfg, &reversed, None).unwrap();
    assert_eq!(forward, backward);
}

#[test]
fn single_seed_reports_zero_sd() {
    let data_dir = tempfile::tempdir().unwrap();
    let data = small_corpus(data_dir.path());
    let cfg = ExperimentConfig { n_reservoir_seeds: 1, ..small_config() };
    let table = run_experiment(&cfg, &data, None).unwrap();
    for (_, _, _, sd, n) in table.accuracy_aggregates() {
        assert_eq!(n, 1);
        assert_eq!(sd, 0.0);
    }
}

#[test]
fn separable_tone_dataset_is_classified_perfectly() {
    // two digits x two speakers, digits separated by tone frequency and
    // speakers by a low-frequency carrier: every seed must reach 1.0
    let dir = tempfile::tempdir().unwrap();
    let fs = 8000u32;
    let mut data = Vec::new();
    for digit in 0..2u8 {
        for speaker in 0..2usize {
            for take in 0..2usize {
                let tone_hz = if digit == 0 { 600.0 } else { 2400.0 };
                let carrier_hz = if speaker == 0 { 120.0 } else { 260.0 };
                let phase = take as f64 * 0.7;
                let samples: Vec<f64> = (0..4000)
                    .map(|i| {
                        let t = i as f64 / fs as f64;
                        0.4 * (std::f64::consts::TAU * tone_hz * t + phase).sin()
                            + 0.4 * (std::f64::consts::TAU * carrier_hz * t).sin()
                    })
                    .collect();
                let id = format!("{digit}_sp{speaker}_{take}");
                let path = dir.path().join(format!("{id}.wav"));
                write_wav_pcm16(&path, &AudioBuffer::new(samples, fs)).unwrap();
                data.push(Utterance {
                    id,
                    path,
                    digit_label: digit,
                    speaker_label: format!("sp{speaker}"),
                });
            }
        }
    }
    let cfg = ExperimentConfig {
        split: SplitConfig { train_fraction: 0.5, ..SplitConfig::default() },
        ..small_config()
    };
    let table = run_experiment(&cfg, &data, None).unwrap();
    for row in &table.accuracy {
        assert_eq!(row.accuracy, 1.0, "{:?} seed {}", row.task, row.seed);
    }
}

#[test]
fn experiment_requires_two_digits_and_speakers() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec { speakers: 1, digits: 3, takes: 2, ..SyntheticSpec::default() };
    let data = generate_synthetic_dataset(dir.path(), &spec).unwrap();
    assert!(run_experiment(&small_config(), &data, None).is_err());
}

#[test]
fn shipped_table1_matches_builder_and_loads() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1.csv");
    let loaded = MelComponentTable::read_csv(&path).unwrap();
    assert_eq!(loaded.num_channels(), 10);
    assert_eq!(loaded, table1_style_bank().unwrap());
    // channel 1 is the published table, bit-exact
    let ch1 = loaded.channel(0);
    assert_eq!(ch1.len(), 8);
    assert_eq!(ch1[0].freq_hz, 131.0);
    assert_eq!(ch1[0].parameter, 0.002454697);
    assert_eq!(ch1[7].freq_hz, 201.0);
    assert_eq!(ch1[7].parameter, 0.001294982);
}

#[test]
fn tmfwc_experiment_works_with_shipped_table() {
    let data_dir = tempfile::tempdir().unwrap();
    let data = small_corpus(data_dir.path());
    let table =
        MelComponentTable::read_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1.csv"))
            .unwrap();
    let mut cfg = small_config();
    cfg.extractor = ExtractorConfig {
        kind: ExtractorKind::Tmfwc,
        tmfwc_table: Some(table),
        ..ExtractorConfig::default()
    };
    let result = run_experiment(&cfg, &data, None).unwrap();
    assert_eq!(result.accuracy.len(), 4); // 2 tasks x 2 seeds
}
