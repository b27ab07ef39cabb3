//! Seeded train/test splitting, optionally stratified per
//! (digit, speaker) cell.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EvalError, Utterance};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { train_fraction: 0.8, stratified: true, seed: 7 }
    }
}

/// Split into disjoint (train, test) with union = input. Stratified mode
/// splits each (digit, speaker) cell proportionally and requires every
/// observed digit x speaker combination to be populated.
pub fn stratified_split(
    data: &[Utterance],
    cfg: &SplitConfig,
) -> Result<(Vec<Utterance>, Vec<Utterance>), EvalError> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(EvalError::ConfigInvalid(format!(
            "train_fraction {} outside (0, 1)",
            cfg.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();

    let split_cell = |cell: &mut Vec<Utterance>,
                      rng: &mut ChaCha8Rng,
                      train: &mut Vec<Utterance>,
                      test: &mut Vec<Utterance>| {
        cell.sort_by(|a, b| a.id.cmp(&b.id));
        cell.shuffle(rng);
        let n_train = ((cfg.train_fraction * cell.len() as f64).round() as usize).min(cell.len());
        for (i, u) in cell.drain(..).enumerate() {
            if i < n_train {
                train.push(u);
            } else {
                test.push(u);
            }
        }
    };

    if cfg.stratified {
        let digits: BTreeSet<u8> = data.iter().map(|u| u.digit_label).collect();
        let speakers: BTreeSet<&str> = data.iter().map(|u| u.speaker_label.as_str()).collect();
        let mut cells: BTreeMap<(u8, String), Vec<Utterance>> = BTreeMap::new();
        for u in data {
            cells.entry((u.digit_label, u.speaker_label.clone())).or_default().push(u.clone());
        }
        for &d in &digits {
            for &s in &speakers {
                if !cells.contains_key(&(d, s.to_string())) {
                    return Err(EvalError::EmptyCell { digit: d, speaker: s.to_string() });
                }
            }
        }
        for (_, mut cell) in cells {
            split_cell(&mut cell, &mut rng, &mut train, &mut test);
        }
    } else {
        let mut all: Vec<Utterance> = data.to_vec();
        split_cell(&mut all, &mut rng, &mut train, &mut test);
    }

    train.sort_by(|a, b| a.id.cmp(&b.id));
    test.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((train, test))
}
