//! Extraction-cost benchmark: wall time and exact operation counts for
//! each feature path over the same utterances.
//!
//! Methodology: all audio is decoded up front, extraction runs pinned to
//! the calling thread, three warm-up passes precede the timed
//! repetitions, and the per-utterance wall time is the median over
//! repetitions. Operation counts come from one separately counted pass,
//! so instrumentation never contaminates the timed loop.

use crate::audio::{load_wav, AudioBuffer};
use crate::metrics;

use super::experiment::time_extraction_pass;
use super::{EvalError, ExtractorConfig, PreparedExtractor, TimingRow, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub warmup: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { repetitions: 20, warmup: 3 }
    }
}

/// Benchmark every config over the same data. Returns one timing row per
/// extractor configuration, in input order.
pub fn benchmark_extraction(
    data: &[Utterance],
    configs: &[ExtractorConfig],
    opts: &BenchOptions,
) -> Result<Vec<TimingRow>, EvalError> {
    if data.is_empty() {
        return Err(EvalError::ConfigInvalid("benchmark needs at least one utterance".into()));
    }
    if opts.repetitions == 0 {
        return Err(EvalError::ConfigInvalid("benchmark needs at least one repetition".into()));
    }
    let buffers: Vec<AudioBuffer> =
        data.iter().map(|u| load_wav(&u.path)).collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let prepared = PreparedExtractor::new(cfg)?;

        for _ in 0..opts.warmup {
            time_extraction_pass(&prepared, &buffers)?;
        }
        let mut samples: Vec<f64> = (0..opts.repetitions)
            .map(|_| time_extraction_pass(&prepared, &buffers))
            .collect::<Result<_, _>>()?;
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if samples.len() % 2 == 1 {
            samples[samples.len() / 2]
        } else {
            0.5 * (samples[samples.len() / 2 - 1] + samples[samples.len() / 2])
        };

        // one counted pass, outside the timed loop
        metrics::reset();
        for buf in &buffers {
            let _ = prepared.extract(buf)?;
        }
        let counts = metrics::snapshot();
        metrics::reset();

        rows.push(TimingRow {
            extractor: cfg.kind,
            utterances: data.len(),
            repetitions: opts.repetitions,
            median_s_per_utterance: median / data.len() as f64,
            total_macs: counts.macs,
            total_transform_calls: counts.transform_calls,
        });
    }
    Ok(rows)
}
