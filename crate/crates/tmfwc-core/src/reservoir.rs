//! Echo-state-network reservoir with fixed random weights and trainable
//! linear readouts.
//!
//! The recurrent matrix is drawn uniform [-1, 1] at the requested density
//! from a seeded ChaCha8 generator (stream 0; the input matrix uses
//! stream 1), then rescaled so its spectral radius matches the requested
//! value. State updates follow the leaky-integrator form
//! x' = (1 - a) x + a tanh(W x + W_in u).
//!
//! Utterances are summarized as mean state concatenated with final state,
//! and readouts are ridge regressions onto one-hot targets solved by
//! Cholesky factorization of the regularized normal equations. Several
//! readouts can share one reservoir; training never touches W or W_in.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::FeatureMatrix;

#[derive(Debug, Error)]
pub enum ReservoirError {
    #[error("invalid params: {0}")]
    InvalidParams(String),
    #[error("singular rescale: generated recurrent matrix is all zero (density * n^2 too small)")]
    SingularRescale,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("insufficient data: class {0} has no training example")]
    InsufficientData(usize),
    #[error("ill-conditioned readout system; raise ridge_lambda")]
    IllConditioned,
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("model parse failure: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ReservoirParams {
    pub n_nodes: usize,
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub leak_rate: f64,
    pub input_density: f64,
    pub recurrent_density: f64,
    pub seed: u64,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        Self {
            n_nodes: 200,
            spectral_radius: 0.9,
            input_scaling: 0.5,
            leak_rate: 0.3,
            input_density: 0.1,
            recurrent_density: 0.1,
            seed: 42,
        }
    }
}

impl ReservoirParams {
    pub fn validate(&self) -> Result<(), ReservoirError> {
        if self.n_nodes == 0 {
            return Err(ReservoirError::InvalidParams("n_nodes must be >= 1".into()));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius < 1.0) {
            return Err(ReservoirError::InvalidParams(format!(
                "spectral_radius {} outside the echo-state range (0, 1)",
                self.spectral_radius
            )));
        }
        if !(self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return Err(ReservoirError::InvalidParams(format!(
                "leak_rate {} outside (0, 1]",
                self.leak_rate
            )));
        }
        for (name, d) in
            [("input_density", self.input_density), ("recurrent_density", self.recurrent_density)]
        {
            if !(d > 0.0 && d <= 1.0) {
                return Err(ReservoirError::InvalidParams(format!("{name} {d} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Fixed random recurrent network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    w: DMatrix<f64>,
    w_in: DMatrix<f64>,
    params: ReservoirParams,
}

impl Reservoir {
    /// Draw W (stream 0) and W_in (stream 1) from ChaCha8 seeded with
    /// `params.seed`, then rescale W to the requested spectral radius,
    /// measured by power iteration to 1e-8.
    pub fn new(params: &ReservoirParams, input_dim: usize) -> Result<Self, ReservoirError> {
        params.validate()?;
        if input_dim == 0 {
            return Err(ReservoirError::InvalidParams("input_dim must be >= 1".into()));
        }
        let n = params.n_nodes;

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(0);
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let keep = rng.random::<f64>() < params.recurrent_density;
                let value = rng.random_range(-1.0..=1.0);
                if keep {
                    w[(i, j)] = value;
                }
            }
        }

        let radius = spectral_radius(&w, 1e-8);
        if radius <= f64::MIN_POSITIVE {
            return Err(ReservoirError::SingularRescale);
        }
        w *= params.spectral_radius / radius;

        let mut rng_in = ChaCha8Rng::seed_from_u64(params.seed);
        rng_in.set_stream(1);
        let mut w_in = DMatrix::zeros(n, input_dim);
        for i in 0..n {
            for j in 0..input_dim {
                let keep = rng_in.random::<f64>() < params.input_density;
                let value = rng_in.random_range(-params.input_scaling..=params.input_scaling);
                if keep {
                    w_in[(i, j)] = value;
                }
            }
        }

        Ok(Self { w, w_in, params: params.clone() })
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn n_nodes(&self) -> usize {
        self.params.n_nodes
    }

    /// Recurrent weights (read-only view).
    pub fn recurrent_weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Input weights (read-only view).
    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.w_in
    }

    /// One leaky-integrator step: x' = (1 - a) x + a tanh(W x + W_in u).
    pub fn update_state(
        &self,
        state: &DVector<f64>,
        input: &[f64],
    ) -> Result<DVector<f64>, ReservoirError> {
        if state.len() != self.params.n_nodes {
            return Err(ReservoirError::DimensionMismatch(format!(
                "state has {} nodes, reservoir {}",
                state.len(),
                self.params.n_nodes
            )));
        }
        if input.len() != self.w_in.ncols() {
            return Err(ReservoirError::DimensionMismatch(format!(
                "input has {} dims, reservoir expects {}",
                input.len(),
                self.w_in.ncols()
            )));
        }
        let u = DVector::from_column_slice(input);
        let mut pre = &self.w * state;
        pre += &self.w_in * u;
        let a = self.params.leak_rate;
        Ok(state * (1.0 - a) + pre.map(f64::tanh) * a)
    }

    /// Drive the reservoir from the zero state through every row of the
    /// feature matrix and summarize the trajectory.
    pub fn run_sequence(&self, feats: &FeatureMatrix) -> Result<StateSummary, ReservoirError> {
        if feats.rows() == 0 {
            return Err(ReservoirError::DimensionMismatch("empty feature matrix".into()));
        }
        if feats.cols() != self.w_in.ncols() {
            return Err(ReservoirError::DimensionMismatch(format!(
                "features have {} columns, reservoir expects {}",
                feats.cols(),
                self.w_in.ncols()
            )));
        }
        let n = self.params.n_nodes;
        let mut state = DVector::zeros(n);
        let mut mean = DVector::zeros(n);
        for r in 0..feats.rows() {
            state = self.update_state(&state, feats.row(r))?;
            mean += &state;
        }
        mean /= feats.rows() as f64;
        Ok(StateSummary {
            mean_state: mean.as_slice().to_vec(),
            final_state: state.as_slice().to_vec(),
        })
    }
}

/// Largest absolute eigenvalue, via power iteration with a two-dimensional
/// Krylov projection so complex conjugate dominant pairs converge too.
pub fn spectral_radius(w: &DMatrix<f64>, tol: f64) -> f64 {
    let n = w.nrows();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return w[(0, 0)].abs();
    }
    // deterministic start vector with no special structure
    let mut x = DVector::from_fn(n, |i, _| (0.754_877_666 * i as f64 + 0.5).sin() + 0.1);
    if x.norm() == 0.0 {
        return 0.0;
    }
    x /= x.norm();

    let mut estimate = 0.0_f64;
    let mut stable = 0;
    for _ in 0..100_000 {
        let y = w * &x;
        let ny = y.norm();
        if ny <= f64::MIN_POSITIVE {
            return 0.0;
        }
        let z = w * &y;

        // Galerkin projection onto span{x, y}
        let a = x.dot(&y); // x is unit
        let mut q2 = &y - &x * a;
        let r = q2.norm();
        let next = if r > 1e-13 * ny {
            q2 /= r;
            // H = Q^T W Q with Q = [x q2]; W x = y, W q2 = (z - a*y)/r
            let wq2 = (&z - &y * a) / r;
            let h11 = x.dot(&y);
            let h12 = x.dot(&wq2);
            let h21 = q2.dot(&y);
            let h22 = q2.dot(&wq2);
            max_eigen_modulus_2x2(h11, h12, h21, h22)
        } else {
            // dominant eigenvector is (numerically) real: Rayleigh quotient
            a.abs()
        };

        let nz = z.norm();
        if nz <= f64::MIN_POSITIVE {
            return 0.0;
        }
        x = z / nz;

        if (next - estimate).abs() <= tol * next.max(f64::MIN_POSITIVE) {
            stable += 1;
            if stable >= 5 {
                return next;
            }
        } else {
            stable = 0;
        }
        estimate = next;
    }
    estimate
}

fn max_eigen_modulus_2x2(h11: f64, h12: f64, h21: f64, h22: f64) -> f64 {
    let trace = h11 + h22;
    let det = h11 * h22 - h12 * h21;
    let disc = trace * trace / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (trace / 2.0 + s).abs().max((trace / 2.0 - s).abs())
    } else {
        // conjugate pair: |lambda|^2 = det
        det.sqrt()
    }
}

/// Fixed-size description of one utterance's trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSummary {
    pub mean_state: Vec<f64>,
    pub final_state: Vec<f64>,
}

impl StateSummary {
    /// mean ++ final, the readout's input.
    pub fn concatenated(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.mean_state.len() + self.final_state.len());
        v.extend_from_slice(&self.mean_state);
        v.extend_from_slice(&self.final_state);
        v
    }

    pub fn dim(&self) -> usize {
        self.mean_state.len() + self.final_state.len()
    }
}

/// Which classification task a readout was trained for.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum TaskLabel {
    Digit,
    Speaker,
}

/// Linear map from bias-augmented summaries to class scores.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReadoutWeights {
    /// classes x (summary dim + 1); the last column is the bias.
    pub w_out: Vec<Vec<f64>>,
    pub task_label: TaskLabel,
}

impl ReadoutWeights {
    pub fn num_classes(&self) -> usize {
        self.w_out.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_out.first().map_or(0, |r| r.len() - 1)
    }

    /// Scores W_out * [summary; 1] and the argmax class (ties break to the
    /// lowest class id).
    pub fn classify(&self, summary: &StateSummary) -> Result<(usize, Vec<f64>), ReservoirError> {
        let s = summary.concatenated();
        if s.len() != self.input_dim() {
            return Err(ReservoirError::DimensionMismatch(format!(
                "summary dim {} vs readout {}",
                s.len(),
                self.input_dim()
            )));
        }
        let scores: Vec<f64> = self
            .w_out
            .iter()
            .map(|row| {
                let dot: f64 = row[..s.len()].iter().zip(&s).map(|(w, x)| w * x).sum();
                dot + row[s.len()]
            })
            .collect();
        let mut best = 0;
        for (i, &v) in scores.iter().enumerate() {
            if v > scores[best] {
                best = i;
            }
        }
        Ok((best, scores))
    }
}

/// Ridge regression of one-hot class targets on bias-augmented summaries:
/// solve (S^T S + lambda I) X = S^T Y by Cholesky, W_out = X^T. The
/// reservoir itself is not an input here and cannot be modified.
pub fn train_readout(
    summaries: &[StateSummary],
    labels: &[usize],
    ridge_lambda: f64,
    task: TaskLabel,
) -> Result<ReadoutWeights, ReservoirError> {
    if summaries.is_empty() || summaries.len() != labels.len() {
        return Err(ReservoirError::DimensionMismatch(format!(
            "{} summaries vs {} labels",
            summaries.len(),
            labels.len()
        )));
    }
    if ridge_lambda < 0.0 {
        return Err(ReservoirError::InvalidParams("ridge_lambda must be >= 0".into()));
    }
    let dim = summaries[0].dim();
    if summaries.iter().any(|s| s.dim() != dim) {
        return Err(ReservoirError::DimensionMismatch("summaries of mixed dimension".into()));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    for class in 0..n_classes {
        if !labels.contains(&class) {
            return Err(ReservoirError::InsufficientData(class));
        }
    }

    let rows = summaries.len();
    let cols = dim + 1;
    let mut s = DMatrix::zeros(rows, cols);
    for (i, summary) in summaries.iter().enumerate() {
        for (j, v) in summary.concatenated().into_iter().enumerate() {
            s[(i, j)] = v;
        }
        s[(i, dim)] = 1.0;
    }
    let mut y = DMatrix::zeros(rows, n_classes);
    for (i, &label) in labels.iter().enumerate() {
        y[(i, label)] = 1.0;
    }

    let mut gram = s.transpose() * &s;
    for j in 0..cols {
        gram[(j, j)] += ridge_lambda;
    }
    let rhs = s.transpose() * y;
    let chol = gram.cholesky().ok_or(ReservoirError::IllConditioned)?;
    let x = chol.solve(&rhs); // cols x n_classes

    let w_out = (0..n_classes).map(|class| (0..cols).map(|j| x[(j, class)]).collect()).collect();
    Ok(ReadoutWeights { w_out, task_label: task })
}

/// Independent ridge solutions over shared summaries, one per task.
pub fn train_multitask(
    summaries: &[StateSummary],
    tasks: &BTreeMap<TaskLabel, Vec<usize>>,
    ridge_lambda: f64,
) -> Result<BTreeMap<TaskLabel, ReadoutWeights>, ReservoirError> {
    tasks
        .iter()
        .map(|(&task, labels)| {
            train_readout(summaries, labels, ridge_lambda, task).map(|w| (task, w))
        })
        .collect()
}

/// Persistent form of a trained model: parameters (the matrices are
/// re-derived from the seed) plus per-task readouts.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReservoirModel {
    pub params: ReservoirParams,
    pub input_dim: usize,
    pub readouts: BTreeMap<TaskLabel, ReadoutWeights>,
}

impl ReservoirModel {
    pub fn save_json(&self, path: &Path) -> Result<(), ReservoirError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self, ReservoirError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
