//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers. Run with
//! `cargo test -p tmfwc-core --test acceptance -- --nocapture`.

mod common;

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmfwc_core::audio::AudioBuffer;
use tmfwc_core::eval::synthetic::{generate_synthetic_dataset, SyntheticSpec};
use tmfwc_core::eval::{
    benchmark_extraction, emit_report, run_experiment, BenchOptions, ExperimentConfig,
    ExtractorConfig, ExtractorKind, FeatureCache, ResultTable,
};
use tmfwc_core::mfcc::{dft_power_spectrum, dft_power_spectrum_direct, hz_to_mel, mel_to_hz};
use tmfwc_core::reservoir::{train_readout, Reservoir, ReservoirParams, StateSummary, TaskLabel};
use tmfwc_core::tmfwc::{
    convolve_channel, magnitude_envelope, synthesize_filterbank, MelComponentTable, MelWaveKernel,
    TmfwcConfig,
};
use tmfwc_core::wavelet::{
    dwt_multilevel, dwt_single_level, BoundaryMode, WaveletFamily, WaveletSpec,
};

fn tone(freq: f64, fs: u32, n: usize) -> AudioBuffer {
    let samples =
        (0..n).map(|i| (std::f64::consts::TAU * freq * i as f64 / fs as f64).sin()).collect();
    AudioBuffer::new(samples, fs)
}

fn table1_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table1.csv")
}

#[test]
fn criterion_01_dft_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sizes = [64usize, 160, 512];
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = sizes[i % sizes.len()];
        let frame: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fft_size = n.next_power_of_two();
        let fast = dft_power_spectrum(&frame, fft_size).unwrap();
        let direct = dft_power_spectrum_direct(&frame, fft_size).unwrap();
        for (a, b) in fast.iter().zip(&direct) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-9, "max |fft - direct| = {worst}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 01 dft-oracle: PASS (max abs deviation {worst:.3e} over 100 frames, {elapsed:.2?})"
    );
}

#[test]
fn criterion_02_mel_scale() {
    assert_eq!(hz_to_mel(0.0).unwrap(), 0.0);
    let mel_1k = hz_to_mel(1000.0).unwrap();
    assert!((mel_1k - 999.99).abs() <= 0.01, "hz_to_mel(1000) = {mel_1k}");
    let mut worst = 0.0f64;
    for f in 1..=4000u32 {
        let f = f as f64;
        let back = mel_to_hz(hz_to_mel(f).unwrap()).unwrap();
        worst = worst.max(((back - f) / f).abs());
    }
    assert!(worst < 1e-6, "worst round-trip rel err {worst}");
    println!(
        "ACCEPTANCE 02 mel-scale: PASS (mel(1000 Hz) = {mel_1k:.4}, worst round-trip rel err {worst:.3e})"
    );
}

#[test]
fn criterion_03_table1_fidelity() {
    let table = MelComponentTable::read_csv(&table1_path()).unwrap();
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
    let ch1 = table.channel(0);
    assert_eq!(ch1.len(), 8);
    for (comp, (freq, param)) in ch1.iter().zip(published) {
        assert_eq!(comp.freq_hz, freq, "frequency drifted");
        assert_eq!(comp.parameter, param, "parameter drifted");
    }
    // synthesized kernel carries exactly these components: a kernel from
    // the table equals a kernel rebuilt from the printed pairs
    let cfg = TmfwcConfig::default();
    let from_table = synthesize_filterbank(&table, 8000, &cfg).unwrap().remove(0);
    let printed = MelComponentTable::new(vec![published
        .iter()
        .map(|&(freq_hz, parameter)| tmfwc_core::tmfwc::Component { freq_hz, parameter })
        .collect()])
    .unwrap();
    let from_printed = synthesize_filterbank(&printed, 8000, &cfg).unwrap().remove(0);
    assert_eq!(from_table.real_kernel, from_printed.real_kernel);
    assert_eq!(from_table.imag_kernel, from_printed.imag_kernel);

    let base = ch1[0].parameter;
    let mut worst = 0.0f64;
    for (i, comp) in ch1.iter().take(4).enumerate() {
        let ratio = comp.parameter / base;
        worst = worst.max((ratio - (i + 1) as f64).abs() / (i + 1) as f64);
    }
    assert!(worst < 1e-6, "ascending ratio deviation {worst}");
    println!(
        "ACCEPTANCE 03 table1-fidelity: PASS (8/8 pairs exact, ascending ratio 1:2:3:4 within {worst:.3e})"
    );
}

/// |H(f)| of the complex kernel via direct DTFT evaluation (equivalent to
/// reading one bin of a zero-padded DFT).
fn transfer_magnitude(k: &MelWaveKernel, freq_hz: f64) -> f64 {
    let fs = k.sample_rate_hz as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for n in 0..k.len() {
        let phase = -std::f64::consts::TAU * freq_hz * n as f64 / fs;
        re += k.real_kernel[n] * phase.cos() - k.imag_kernel[n] * phase.sin();
        im += k.real_kernel[n] * phase.sin() + k.imag_kernel[n] * phase.cos();
    }
    (re * re + im * im).sqrt()
}

#[test]
fn criterion_04_transfer_function_oracle() {
    let start = Instant::now();
    let table = MelComponentTable::read_csv(&table1_path()).unwrap();
    let cfg = TmfwcConfig::default();
    let kernels = synthesize_filterbank(&table, 8000, &cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rms = |xs: &[f64]| (xs.iter().map(|v| v * v).sum::<f64>() / xs.len() as f64).sqrt();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for (m, kernel) in kernels.iter().enumerate() {
        let lo = table.channel(m).first().unwrap().freq_hz;
        let hi = table.channel(m).last().unwrap().freq_hz;
        for _ in 0..5 {
            let f = rng.random_range(lo..hi);
            let buf = tone(f, 8000, 6000);
            let (re, im) = convolve_channel(&buf, kernel).unwrap();
            let env = magnitude_envelope(&re, &im).unwrap();
            let measured = rms(&env[kernel.len()..env.len() - kernel.len()]);
            let h_pos = transfer_magnitude(kernel, f);
            let h_neg = transfer_magnitude(kernel, -f);
            let predicted = (h_pos * h_pos + h_neg * h_neg).sqrt() / 2.0;
            let rel = ((measured - predicted) / predicted).abs();
            worst = worst.max(rel);
            checked += 1;
        }
    }
    assert_eq!(checked, 50);
    assert!(worst < 0.02, "worst relative deviation {worst}");

    // channel 1 selectivity at 161 vs 500 Hz
    let k1 = &kernels[0];
    let respond = |freq: f64| {
        let buf = tone(freq, 8000, 6000);
        let (re, im) = convolve_channel(&buf, k1).unwrap();
        let env = magnitude_envelope(&re, &im).unwrap();
        rms(&env[k1.len()..env.len() - k1.len()])
    };
    let ratio = respond(161.0) / respond(500.0);
    assert!(ratio >= 20.0, "selectivity {ratio}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 04 transfer-oracle: PASS (50 tones within {:.2}%, 161/500 Hz selectivity {ratio:.1}x, {elapsed:.2?})",
        worst * 100.0
    );
}

#[test]
fn criterion_05_efficiency_structural() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec { speakers: 5, digits: 10, takes: 1, ..SyntheticSpec::default() };
    let data = generate_synthetic_dataset(dir.path(), &spec).unwrap();
    assert!(data.len() >= 50);

    let base = ExtractorConfig::default();
    let configs = [
        ExtractorConfig { kind: ExtractorKind::Tmfwc, ..base.clone() },
        ExtractorConfig { kind: ExtractorKind::Mfcc, ..base.clone() },
    ];
    let timing =
        benchmark_extraction(&data, &configs, &BenchOptions { repetitions: 20, warmup: 3 })
            .unwrap();

    let tmfwc_row = &timing[0];
    let mfcc_row = &timing[1];
    assert_eq!(tmfwc_row.total_transform_calls, 0, "TMFWC path must be transform-free");

    // one transform per frame: 0.5 s at 8 kHz, 20 ms frames, 10 ms hop
    let frames_per_utterance = (4000 - 160) / 80 + 1;
    let expected = (frames_per_utterance * data.len()) as u64;
    assert_eq!(mfcc_row.total_transform_calls, expected);

    let out = dir.path().join("report");
    let results = ResultTable { accuracy: Vec::new(), timing: timing.clone() };
    let paths = emit_report(&results, &out).unwrap();
    let timing_csv = paths.timing_csv.expect("timing.csv written");
    assert!(timing_csv.exists());
    println!(
        "ACCEPTANCE 05 efficiency-structural: PASS (tmfwc transforms = 0, mfcc transforms = {expected} = one per frame over {} utterances; median {:.2e} vs {:.2e} s/utt; timing.csv at {})",
        data.len(),
        tmfwc_row.median_s_per_utterance,
        mfcc_row.median_s_per_utterance,
        timing_csv.display()
    );
}

#[test]
fn criterion_06_wavelet_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for family in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
        for k in 2..=12u32 {
            let len = 1usize << k;
            let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let levels = (k as usize).min(5);
            let spec = WaveletSpec { family, levels, boundary: BoundaryMode::Periodic };
            let dec = dwt_multilevel(&x, &spec).unwrap();
            let back = common::idwt_multilevel_periodic(&dec, family, len);
            for (a, b) in x.iter().zip(&back) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    assert!(worst < 1e-9, "worst reconstruction error {worst}");

    let (a, d) =
        dwt_single_level(&[4.0, 2.0, 6.0, 8.0], WaveletFamily::Haar, BoundaryMode::Periodic)
            .unwrap();
    let s = std::f64::consts::SQRT_2;
    let hand = [(a[0], 6.0 / s), (a[1], 14.0 / s), (d[0], 2.0 / s), (d[1], -2.0 / s)];
    let mut hand_worst = 0.0f64;
    for (got, want) in hand {
        hand_worst = hand_worst.max((got - want).abs());
    }
    assert!(hand_worst < 1e-12, "hand example deviation {hand_worst}");
    println!(
        "ACCEPTANCE 06 wavelet-reconstruction: PASS (both families, 2^2..2^12, worst err {worst:.3e}; Haar hand example within {hand_worst:.3e})"
    );
}

#[test]
fn criterion_07_echo_state_convergence() {
    let mut worst = 0.0f64;
    for spectral_radius in [0.5, 0.9, 0.95] {
        let mut seed_rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let params = ReservoirParams {
                n_nodes: 100,
                spectral_radius,
                leak_rate: 1.0,
                seed: seed_rng.random(),
                ..ReservoirParams::default()
            };
            let r = Reservoir::new(&params, 4).unwrap();
            let mut input_rng = ChaCha8Rng::seed_from_u64(70);
            let mut a = nalgebra::DVector::zeros(100);
            let mut b = nalgebra::DVector::from_fn(100, |_, _| input_rng.random_range(-1.0..1.0));
            for _ in 0..500 {
                let u: Vec<f64> = (0..4).map(|_| input_rng.random_range(-1.0..1.0)).collect();
                a = r.update_state(&a, &u).unwrap();
                b = r.update_state(&b, &u).unwrap();
            }
            let dist = (&a - &b).norm();
            worst = worst.max(dist);
            assert!(dist < 1e-6, "radius {spectral_radius}: distance {dist}");
        }
    }
    println!(
        "ACCEPTANCE 07 echo-state: PASS (radii 0.5/0.9/0.95, 10 seeds each, worst distance {worst:.3e} after 500 steps)"
    );
}

#[test]
fn criterion_08_ridge_readout() {
    // normal-equation residual on random systems
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n_examples = rng.random_range(10..50);
        let half_dim = rng.random_range(2..25);
        let classes = rng.random_range(2..5);
        let summaries: Vec<StateSummary> = (0..n_examples)
            .map(|_| StateSummary {
                mean_state: (0..half_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                final_state: (0..half_dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            })
            .collect();
        let labels: Vec<usize> = (0..n_examples).map(|i| i % classes).collect();
        let lambda = 1e-6;
        let readout = train_readout(&summaries, &labels, lambda, TaskLabel::Digit).unwrap();

        let dim = 2 * half_dim;
        let cols = dim + 1;
        let mut s = nalgebra::DMatrix::zeros(n_examples, cols);
        for (i, summary) in summaries.iter().enumerate() {
            for (j, v) in summary.concatenated().into_iter().enumerate() {
                s[(i, j)] = v;
            }
            s[(i, dim)] = 1.0;
        }
        let mut y = nalgebra::DMatrix::zeros(n_examples, classes);
        for (i, &l) in labels.iter().enumerate() {
            y[(i, l)] = 1.0;
        }
        let mut gram = s.transpose() * &s;
        for j in 0..cols {
            gram[(j, j)] += lambda;
        }
        let wt = nalgebra::DMatrix::from_fn(cols, classes, |j, c| readout.w_out[c][j]);
        let residual = &gram * wt - s.transpose() * y;
        let max = residual.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        worst = worst.max(max);
        assert!(max < 1e-8, "residual {max}");
    }

    // hand-solved two-class system
    let summaries = vec![
        StateSummary { mean_state: vec![1.0], final_state: vec![0.0] },
        StateSummary { mean_state: vec![0.0], final_state: vec![1.0] },
    ];
    let readout = train_readout(&summaries, &[0, 1], 1e-9, TaskLabel::Digit).unwrap();
    for (i, s) in summaries.iter().enumerate() {
        let (class, _) = readout.classify(s).unwrap();
        assert_eq!(class, i);
    }
    println!(
        "ACCEPTANCE 08 ridge-readout: PASS (worst normal-equation residual {worst:.3e}; hand-solved system classified)"
    );
}

#[test]
fn criterion_09_desk_scale_recognition() {
    // Stand-in corpus: the paper's corpora are not redistributable here,
    // so a deterministic synthetic spoken-digit-style corpus in AudioMNIST
    // layout is used at the required cardinality (10 speakers x 10 digits
    // x 10 takes). Explicitly NOT a paper number.
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec::default();
    let data = generate_synthetic_dataset(dir.path(), &spec).unwrap();
    assert_eq!(data.len(), 1000);

    let cache_dir = tempfile::tempdir().unwrap();
    let cache = FeatureCache::open_at(cache_dir.path()).unwrap();
    let cfg = ExperimentConfig {
        n_reservoir_seeds: 10,
        threads: 1, // the runtime bound is a single-threaded claim
        ..ExperimentConfig::default()
    };
    let table = run_experiment(&cfg, &data, Some(&cache)).unwrap();

    let mut digit_mean = 0.0;
    let mut speaker_mean = 0.0;
    for (task, _, mean, sd, n) in table.accuracy_aggregates() {
        assert_eq!(n, 10);
        match task {
            TaskLabel::Digit => digit_mean = mean,
            TaskLabel::Speaker => speaker_mean = mean,
        }
        println!("  {task:?}: mean {mean:.4} sd {sd:.4}");
    }
    let digit_chance = 0.1;
    let speaker_chance = 0.1; // 10 synthetic speakers
    assert!(digit_mean >= 0.85, "digit accuracy {digit_mean}");
    assert!(speaker_mean >= 0.90, "speaker accuracy {speaker_mean}");
    assert!(digit_mean >= 8.0 * digit_chance, "digit accuracy below 8x chance");
    assert!(speaker_mean >= 8.0 * speaker_chance, "speaker accuracy below 8x chance");

    // label-shuffled control: permute the (digit, speaker) pairs across
    // utterances; accuracy must collapse to chance within 3 sigma
    let mut shuffled = data.clone();
    let mut label_pairs: Vec<(u8, String)> =
        shuffled.iter().map(|u| (u.digit_label, u.speaker_label.clone())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    label_pairs.shuffle(&mut rng);
    for (u, (digit, speaker)) in shuffled.iter_mut().zip(label_pairs) {
        u.digit_label = digit;
        u.speaker_label = speaker;
    }
    let control_cfg = ExperimentConfig {
        n_reservoir_seeds: 2,
        split: tmfwc_core::eval::SplitConfig { stratified: false, ..Default::default() },
        threads: 1,
        ..ExperimentConfig::default()
    };
    let control = run_experiment(&control_cfg, &shuffled, Some(&cache)).unwrap();
    let n_test = (data.len() as f64 * 0.2).round();
    for (task, _, mean, _, _) in control.accuracy_aggregates() {
        let chance = 0.1;
        let sigma = (chance * (1.0 - chance) / n_test).sqrt();
        assert!(
            (mean - chance).abs() <= 3.0 * sigma,
            "{task:?} shuffled control {mean} outside chance {chance} +/- {:.4}",
            3.0 * sigma
        );
        println!("  control {task:?}: {mean:.4} (chance {chance} +/- {:.4})", 3.0 * sigma);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "ACCEPTANCE 09 desk-scale: PASS (digit {digit_mean:.4} >= 0.85, speaker {speaker_mean:.4} >= 0.90, >= 8x chance, shuffled control at chance, {elapsed:.1?} single-threaded, synthetic corpus)"
    );
}

#[test]
fn criterion_10_determinism() {
    let data_dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec { speakers: 3, digits: 10, takes: 3, ..SyntheticSpec::default() };
    let data = generate_synthetic_dataset(data_dir.path(), &spec).unwrap();
    let cfg = ExperimentConfig {
        n_reservoir_seeds: 3,
        reservoir: ReservoirParams { n_nodes: 80, ..ReservoirParams::default() },
        ..ExperimentConfig::default()
    };

    let run = |out: &Path| -> Vec<u8> {
        let table = run_experiment(&cfg, &data, None).unwrap();
        emit_report(&table, out).unwrap();
        std::fs::read(out.join("accuracy.csv")).unwrap()
    };
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    let bytes1 = run(out1.path());
    let bytes2 = run(out2.path());
    assert_eq!(bytes1, bytes2, "accuracy.csv differs between identical runs");
    println!(
        "ACCEPTANCE 10 determinism: PASS (two runs, byte-identical accuracy.csv of {} bytes)",
        bytes1.len()
    );
}
