//! Command-line surface for the TMFWC pipeline: feature extraction,
//! kernel inspection, training, evaluation, benchmarking, and report
//! emission.
//!
//! Exit codes: 0 success, 1 I/O failures, 2 configuration errors
//! (including unknown flags), 3 data errors (malformed audio, unusable
//! datasets).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tmfwc_core::audio::load_wav;
use tmfwc_core::eval::{
    benchmark_extraction, emit_report, evaluate_model, load_dataset, run_experiment_with_models,
    BenchOptions, DatasetLayout, ExperimentConfig, ExperimentModel, ExtractorConfig, ExtractorKind,
    FeatureCache, PreparedExtractor, ResultTable, Utterance,
};
use tmfwc_core::tmfwc::{derive_component_table, synthesize_filterbank, MelComponentTable};

mod config;
use config::{CliError, FileConfig};

#[derive(Parser)]
#[command(
    name = "tmfwc",
    version,
    about = "Time-domain mel-frequency wavelet coefficient extraction and reservoir classification"
)]
struct Cli {
    /// JSON config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Feature extractor
    #[arg(long, global = true, value_parser = parse_extractor)]
    extractor: Option<ExtractorKind>,

    /// Component table CSV overriding the derived mel table
    #[arg(long, global = true)]
    table: Option<PathBuf>,

    /// Number of reservoir seeds
    #[arg(long, global = true)]
    seeds: Option<usize>,

    /// Train fraction of the stratified split
    #[arg(long, global = true)]
    train_frac: Option<f64>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker cap (1 = serial); bench always runs single-threaded
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Master seed (sets both the split seed and the reservoir base seed)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cepstral coefficient count for the MFCC extractor
    #[arg(long, global = true)]
    num_ceps: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract features from one WAV or a dataset directory
    Extract {
        /// WAV file or dataset directory
        input: PathBuf,
        /// Dataset layout for directory inputs
        #[arg(long, value_parser = parse_layout)]
        layout: Option<DatasetLayout>,
    },
    /// Materialize the time-domain kernels and their component table
    SynthKernels,
    /// Train digit+speaker readouts across reservoir seeds and report accuracy
    Train {
        /// Dataset directory
        input: PathBuf,
        #[arg(long, value_parser = parse_layout)]
        layout: Option<DatasetLayout>,
    },
    /// Evaluate a saved model on a dataset
    Eval {
        /// Dataset directory
        input: PathBuf,
        /// Model JSON written by train
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = parse_layout)]
        layout: Option<DatasetLayout>,
    },
    /// Benchmark extraction cost of all three paths
    Bench {
        /// Dataset directory
        input: PathBuf,
        #[arg(long, value_parser = parse_layout)]
        layout: Option<DatasetLayout>,
        /// Timed repetitions (median is reported)
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Re-emit report files from a results.json
    Report {
        /// Directory containing results.json (or a path to it)
        input: PathBuf,
    },
}

fn parse_extractor(s: &str) -> Result<ExtractorKind, String> {
    match s {
        "tmfwc" => Ok(ExtractorKind::Tmfwc),
        "mfcc" => Ok(ExtractorKind::Mfcc),
        "dwt" => Ok(ExtractorKind::Dwt),
        other => Err(format!("unknown extractor {other:?} (expected tmfwc|mfcc|dwt)")),
    }
}

fn parse_layout(s: &str) -> Result<DatasetLayout, String> {
    match s {
        "audio-mnist" | "audiomnist" => Ok(DatasetLayout::AudioMnist),
        "fsdd" => Ok(DatasetLayout::Fsdd),
        "manifest-csv" | "manifest" => Ok(DatasetLayout::ManifestCsv),
        other => Err(format!("unknown layout {other:?} (expected audio-mnist|fsdd|manifest-csv)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    // command-line overrides win over file values
    if let Some(kind) = cli.extractor {
        cfg.extractor.kind = kind;
    }
    if let Some(table_path) = &cli.table {
        let table = MelComponentTable::read_csv(table_path).map_err(CliError::from)?;
        cfg.extractor.tmfwc.num_channels = table.num_channels();
        cfg.extractor.tmfwc_table = Some(table);
    }
    if let Some(seeds) = cli.seeds {
        cfg.n_reservoir_seeds = seeds;
    }
    if let Some(frac) = cli.train_frac {
        cfg.split.train_fraction = frac;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if let Some(seed) = cli.seed {
        cfg.split.seed = seed;
        cfg.reservoir.seed = seed;
    }
    if let Some(num_ceps) = cli.num_ceps {
        cfg.extractor.mfcc.num_ceps = num_ceps;
    }

    match &cli.command {
        Command::Extract { input, layout } => {
            cmd_extract(&cfg, input, layout.unwrap_or(cfg.layout), &cli.out)
        }
        Command::SynthKernels => cmd_synth_kernels(&cfg, &cli.out),
        Command::Train { input, layout } => {
            cmd_train(&cfg, input, layout.unwrap_or(cfg.layout), &cli.out)
        }
        Command::Eval { input, model, layout } => {
            cmd_eval(&cfg, cli.extractor, input, model, layout.unwrap_or(cfg.layout), &cli.out)
        }
        Command::Bench { input, layout, reps } => {
            let mut opts = cfg.bench;
            if let Some(reps) = reps {
                opts.repetitions = *reps;
            }
            cmd_bench(&cfg, input, layout.unwrap_or(cfg.layout), opts, &cli.out)
        }
        Command::Report { input } => cmd_report(input, &cli.out),
    }
}

fn ensure_out(cfg: &FileConfig, command: &str, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::io(format!("creating {}: {e}", out.display())))?;
    cfg.write_resolved(command, out)
}

fn load_utterances(input: &Path, layout: DatasetLayout) -> Result<Vec<Utterance>, CliError> {
    if !input.exists() {
        return Err(CliError::io(format!("{}: no such file or directory", input.display())));
    }
    let loaded = load_dataset(input, layout).map_err(CliError::from)?;
    if loaded.skipped > 0 {
        eprintln!("warning: skipped {} file(s) not matching the layout", loaded.skipped);
    }
    Ok(loaded.utterances)
}

fn open_cache(out: &Path) -> Result<FeatureCache, CliError> {
    // TMFWC_CACHE_DIR redirects the cache; without it, cache under out/
    FeatureCache::open(&out.join("feature-cache")).map_err(CliError::from)
}

fn cmd_extract(
    cfg: &FileConfig,
    input: &Path,
    layout: DatasetLayout,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out(cfg, "extract", out)?;
    let prepared = PreparedExtractor::new(&cfg.extractor).map_err(CliError::from)?;
    let names = cfg.extractor.column_names();
    let kind = cfg.extractor.kind;

    let write_one = |stem: &str, path: &Path| -> Result<(), CliError> {
        let buf = load_wav(path).map_err(CliError::from)?;
        let features = prepared.extract(&buf).map_err(CliError::from)?;
        let out_path = out.join(format!("{stem}.{kind}.csv"));
        features
            .write_csv(&out_path, &names)
            .map_err(|e| CliError::io(format!("writing {}: {e}", out_path.display())))?;
        Ok(())
    };

    if input.is_file() {
        let stem = input
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::config("input file has no usable stem".into()))?;
        write_one(stem, input)?;
    } else if input.is_dir() {
        for u in load_utterances(input, layout)? {
            write_one(&u.id, &u.path)?;
        }
    } else {
        return Err(CliError::io(format!("{}: no such file or directory", input.display())));
    }
    Ok(())
}

fn cmd_synth_kernels(cfg: &FileConfig, out: &Path) -> Result<(), CliError> {
    ensure_out(cfg, "synth-kernels", out)?;
    let table = match &cfg.extractor.tmfwc_table {
        Some(t) => t.clone(),
        None => derive_component_table(
            &cfg.extractor.tmfwc_bank_spec(),
            cfg.extractor.tmfwc.component_spacing_hz,
        )
        .map_err(CliError::from)?,
    };
    table.write_csv(&out.join("component_table.csv")).map_err(CliError::from)?;
    let kernels = synthesize_filterbank(&table, cfg.extractor.sample_rate_hz, &cfg.extractor.tmfwc)
        .map_err(CliError::from)?;
    for kernel in &kernels {
        let mut text = String::from("real,imag\n");
        for n in 0..kernel.len() {
            text.push_str(&format!("{},{}\n", kernel.real_kernel[n], kernel.imag_kernel[n]));
        }
        let path = out.join(format!("channel_{:02}.csv", kernel.channel_index + 1));
        std::fs::write(&path, text)
            .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
    }
    Ok(())
}

fn experiment_config(cfg: &FileConfig) -> ExperimentConfig {
    ExperimentConfig {
        extractor: cfg.extractor.clone(),
        split: cfg.split,
        n_reservoir_seeds: cfg.n_reservoir_seeds,
        reservoir: cfg.reservoir.clone(),
        ridge_lambda: cfg.ridge_lambda,
        threads: cfg.threads,
    }
}

fn cmd_train(
    cfg: &FileConfig,
    input: &Path,
    layout: DatasetLayout,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out(cfg, "train", out)?;
    let data = load_utterances(input, layout)?;
    let cache = open_cache(out)?;
    let (results, model) = run_experiment_with_models(&experiment_config(cfg), &data, Some(&cache))
        .map_err(CliError::from)?;
    model.save_json(&out.join("model.json")).map_err(CliError::from)?;
    results.save_json(&out.join("results.json")).map_err(CliError::from)?;
    emit_report(&results, out).map_err(CliError::from)?;
    print_accuracy(&results);
    Ok(())
}

fn cmd_eval(
    cfg: &FileConfig,
    extractor_override: Option<ExtractorKind>,
    input: &Path,
    model_path: &Path,
    layout: DatasetLayout,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out(cfg, "eval", out)?;
    let mut model = ExperimentModel::load_json(model_path).map_err(CliError::from)?;
    // an explicit --extractor replaces the model's extraction config; the
    // dimension check against the trained readouts still applies
    if extractor_override.is_some() {
        model.extractor = cfg.extractor.clone();
    }
    let data = load_utterances(input, layout)?;
    let cache = open_cache(out)?;
    let results =
        evaluate_model(&model, &data, Some(&cache), cfg.threads).map_err(CliError::from)?;
    results.save_json(&out.join("results.json")).map_err(CliError::from)?;
    emit_report(&results, out).map_err(CliError::from)?;
    print_accuracy(&results);
    Ok(())
}

fn cmd_bench(
    cfg: &FileConfig,
    input: &Path,
    layout: DatasetLayout,
    opts: BenchOptions,
    out: &Path,
) -> Result<(), CliError> {
    ensure_out(cfg, "bench", out)?;
    let data = load_utterances(input, layout)?;
    let configs: Vec<ExtractorConfig> =
        [ExtractorKind::Tmfwc, ExtractorKind::Mfcc, ExtractorKind::Dwt]
            .into_iter()
            .map(|kind| ExtractorConfig { kind, ..cfg.extractor.clone() })
            .collect();
    let timing = benchmark_extraction(&data, &configs, &opts).map_err(CliError::from)?;
    let results = ResultTable { accuracy: Vec::new(), timing };
    results.save_json(&out.join("results.json")).map_err(CliError::from)?;
    emit_report(&results, out).map_err(CliError::from)?;
    for row in &results.timing {
        println!(
            "{}: median {:.6} s/utterance, {} MACs, {} transforms ({} utterances, {} reps)",
            row.extractor,
            row.median_s_per_utterance,
            row.total_macs,
            row.total_transform_calls,
            row.utterances,
            row.repetitions
        );
    }
    Ok(())
}

fn cmd_report(input: &Path, out: &Path) -> Result<(), CliError> {
    let results_path =
        if input.is_dir() { input.join("results.json") } else { input.to_path_buf() };
    let results = ResultTable::load_json(&results_path).map_err(CliError::from)?;
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::io(format!("creating {}: {e}", out.display())))?;
    emit_report(&results, out).map_err(CliError::from)?;
    println!("report written to {}", out.display());
    Ok(())
}

fn print_accuracy(results: &ResultTable) {
    for (task, extractor, mean, sd, n) in results.accuracy_aggregates() {
        let task = match task {
            tmfwc_core::reservoir::TaskLabel::Digit => "digit",
            tmfwc_core::reservoir::TaskLabel::Speaker => "speaker",
        };
        println!("{task}/{extractor}: accuracy {mean:.4} +/- {sd:.4} over {n} seed(s)");
    }
}
