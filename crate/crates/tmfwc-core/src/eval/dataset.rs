//! Dataset ingestion for the digit/speaker recognition protocol.
//!
//! Three layouts: AudioMNIST-style `{digit}_{speaker}_{take}.wav`
//! filenames anywhere under the root, the free-spoken-digit
//! `{digit}_{speaker}_{index}.wav` convention (same shape, kept as a
//! distinct layout name), and an explicit `manifest.csv` with columns
//! `id,path,digit,speaker`. Files that do not match the layout are
//! skipped and counted, not fatal.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use super::EvalError;

/// One labeled recording.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub id: String,
    pub path: PathBuf,
    pub digit_label: u8,
    pub speaker_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetLayout {
    AudioMnist,
    Fsdd,
    ManifestCsv,
}

/// Parsed dataset plus the count of files skipped as unparseable.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub utterances: Vec<Utterance>,
    pub skipped: usize,
}

fn parse_stem(stem: &str) -> Option<(u8, String)> {
    let mut parts = stem.split('_');
    let digit: u8 = parts.next()?.parse().ok()?;
    if digit > 9 {
        return None;
    }
    let speaker = parts.next()?;
    parts.next()?; // take/index must exist
    Some((digit, speaker.to_string()))
}

/// Scan `root` for utterances in the given layout, ordered by id.
pub fn load_dataset(root: &Path, layout: DatasetLayout) -> Result<LoadedDataset, EvalError> {
    let mut utterances = Vec::new();
    let mut skipped = 0usize;

    match layout {
        DatasetLayout::AudioMnist | DatasetLayout::Fsdd => {
            for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
                let entry = entry.map_err(|e| {
                    EvalError::Io(std::io::Error::other(format!("walking {}: {e}", root.display())))
                })?;
                if !entry.file_type().is_file() {
                    continue;
                }
                let path = entry.path();
                if path.extension().and_then(|e| e.to_str()) != Some("wav") {
                    continue;
                }
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
                match parse_stem(stem) {
                    Some((digit, speaker)) => utterances.push(Utterance {
                        id: stem.to_string(),
                        path: path.to_path_buf(),
                        digit_label: digit,
                        speaker_label: speaker,
                    }),
                    None => skipped += 1,
                }
            }
        }
        DatasetLayout::ManifestCsv => {
            let manifest = root.join("manifest.csv");
            let mut rdr = csv::Reader::from_path(&manifest)
                .map_err(|e| EvalError::Manifest(format!("{}: {e}", manifest.display())))?;
            let headers = rdr.headers().map_err(|e| EvalError::Manifest(e.to_string()))?.clone();
            let col = |name: &str| -> Result<usize, EvalError> {
                headers
                    .iter()
                    .position(|h| h.trim() == name)
                    .ok_or_else(|| EvalError::Manifest(format!("missing column {name}")))
            };
            let (ci, cp, cd, cs) = (col("id")?, col("path")?, col("digit")?, col("speaker")?);
            for rec in rdr.records() {
                let rec = rec.map_err(|e| EvalError::Manifest(e.to_string()))?;
                let digit: u8 = match rec[cd].trim().parse() {
                    Ok(d) if d <= 9 => d,
                    _ => {
                        skipped += 1;
                        continue;
                    }
                };
                utterances.push(Utterance {
                    id: rec[ci].trim().to_string(),
                    path: root.join(rec[cp].trim()),
                    digit_label: digit,
                    speaker_label: rec[cs].trim().to_string(),
                });
            }
        }
    }

    utterances.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seen = BTreeSet::new();
    for u in &utterances {
        if !seen.insert(u.id.clone()) {
            return Err(EvalError::DuplicateId(u.id.clone()));
        }
    }
    if utterances.is_empty() {
        return Err(EvalError::EmptyDataset(root.to_path_buf()));
    }
    Ok(LoadedDataset { utterances, skipped })
}
