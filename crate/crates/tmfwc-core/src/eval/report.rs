//! Report files: `accuracy.csv` and `timing.csv` in plot-ready long
//! format, plus `summary.json` with per-(task, extractor) aggregates.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{EvalError, ResultTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub accuracy_csv: Option<PathBuf>,
    pub timing_csv: Option<PathBuf>,
    pub summary_json: PathBuf,
}

/// Write `accuracy.csv`, `timing.csv`, and `summary.json` under
/// `out_dir`. Empty results are an error and nothing is written.
pub fn emit_report(results: &ResultTable, out_dir: &Path) -> Result<ReportPaths, EvalError> {
    if results.is_empty() {
        return Err(EvalError::ConfigInvalid("no results to report".into()));
    }
    std::fs::create_dir_all(out_dir)?;

    let accuracy_csv = if results.accuracy.is_empty() {
        None
    } else {
        let mut text = String::from("task,extractor,seed,value\n");
        for row in &results.accuracy {
            let task = match row.task {
                crate::reservoir::TaskLabel::Digit => "digit",
                crate::reservoir::TaskLabel::Speaker => "speaker",
            };
            let _ = writeln!(text, "{},{},{},{}", task, row.extractor, row.seed, row.accuracy);
        }
        let path = out_dir.join("accuracy.csv");
        std::fs::write(&path, text)?;
        Some(path)
    };

    let timing_csv = if results.timing.is_empty() {
        None
    } else {
        let mut text = String::from(
            "extractor,utterances,repetitions,median_s_per_utterance,total_macs,total_transform_calls\n",
        );
        for row in &results.timing {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{}",
                row.extractor,
                row.utterances,
                row.repetitions,
                row.median_s_per_utterance,
                row.total_macs,
                row.total_transform_calls
            );
        }
        let path = out_dir.join("timing.csv");
        std::fs::write(&path, text)?;
        Some(path)
    };

    let mut accuracy_summary = serde_json::Map::new();
    for (task, extractor, mean, sd, seeds) in results.accuracy_aggregates() {
        let task_key = match task {
            crate::reservoir::TaskLabel::Digit => "digit",
            crate::reservoir::TaskLabel::Speaker => "speaker",
        };
        let entry = accuracy_summary
            .entry(task_key)
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
        entry.as_object_mut().unwrap().insert(
            extractor.as_str().to_string(),
            serde_json::json!({ "mean": mean, "sd": sd, "seeds": seeds }),
        );
    }
    let summary = serde_json::json!({
        "accuracy": accuracy_summary,
        "timing": results.timing,
    });
    let summary_json = out_dir.join("summary.json");
    std::fs::write(&summary_json, serde_json::to_string_pretty(&summary)?)?;

    Ok(ReportPaths { accuracy_csv, timing_csv, summary_json })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{AccuracyRow, ExtractorKind, TimingRow};
    use crate::reservoir::TaskLabel;

    fn sample_table() -> ResultTable {
        let mut table = ResultTable::default();
        for seed in 0..10u64 {
            for task in [TaskLabel::Digit, TaskLabel::Speaker] {
                table.accuracy.push(AccuracyRow {
                    task,
                    extractor: ExtractorKind::Tmfwc,
                    seed,
                    accuracy: 0.9 + seed as f64 * 0.005,
                });
            }
        }
        table.timing.push(TimingRow {
            extractor: ExtractorKind::Tmfwc,
            utterances: 5,
            repetitions: 20,
            median_s_per_utterance: 0.001,
            total_macs: 123,
            total_transform_calls: 0,
        });
        table
    }

    #[test]
    fn report_cardinality_and_mean_consistency() {
        let table = sample_table();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&table, dir.path()).unwrap();

        let text = std::fs::read_to_string(paths.accuracy_csv.unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21); // header + 10 seeds x 2 tasks
        assert_eq!(lines[0], "task,extractor,seed,value");

        // summary mean equals the arithmetic mean of csv rows
        let digit_values: Vec<f64> = lines[1..]
            .iter()
            .filter(|l| l.starts_with("digit,"))
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect();
        let csv_mean = digit_values.iter().sum::<f64>() / digit_values.len() as f64;
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(paths.summary_json).unwrap()).unwrap();
        let json_mean = summary["accuracy"]["digit"]["tmfwc"]["mean"].as_f64().unwrap();
        assert!((csv_mean - json_mean).abs() < 1e-12);

        let timing = std::fs::read_to_string(paths.timing_csv.unwrap()).unwrap();
        assert_eq!(timing.lines().count(), 2);
    }

    #[test]
    fn empty_results_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("report");
        assert!(emit_report(&ResultTable::default(), &out).is_err());
        assert!(!out.exists());
    }

    #[test]
    fn single_seed_reports_zero_sd() {
        let mut table = ResultTable::default();
        table.accuracy.push(AccuracyRow {
            task: TaskLabel::Digit,
            extractor: ExtractorKind::Mfcc,
            seed: 5,
            accuracy: 0.75,
        });
        let aggregates = table.accuracy_aggregates();
        assert_eq!(aggregates.len(), 1);
        let (_, _, mean, sd, n) = aggregates[0];
        assert_eq!(mean, 0.75);
        assert_eq!(sd, 0.0);
        assert_eq!(n, 1);
    }
}
