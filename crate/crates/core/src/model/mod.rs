//! Differentiable numerics: K-layer mean-aggregation message passing,
//! mean+max readout, MLP heads with softmax, cross-entropy loss with
//! reverse-mode gradients, and a finite-difference checker.

mod backward;
mod checkpoint;
mod forward;
mod params;

pub use backward::{grad_check, loss_and_grad, GradCheckReport, Task};
pub use checkpoint::{load_checkpoint, load_checkpoint_str, save_checkpoint, write_checkpoint};
pub use forward::{gnn_forward, gnn_forward_trace, graph_head, node_head, ActiveGraph, ForwardTrace};
pub use params::{LayerParams, MlpParams, ModelDims, ModelParams};

use ndarray::{Array1, Array2, ArrayView2, Axis};

/// Probabilities below this are clamped inside the loss log.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("zero-norm vector in cosine similarity")]
    ZeroNorm,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    Sgd,
    Momentum,
}

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub layers: usize,
    pub hidden: usize,
    pub optimizer: Optimizer,
    /// Subgraphs drawn per training graph per epoch.
    pub subgraphs_per_graph: usize,
    /// Apply inclusion-frequency loss normalization.
    pub loss_norm: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 50,
            seed: 0,
            layers: 2,
            hidden: 128,
            optimizer: Optimizer::Momentum,
            subgraphs_per_graph: 1,
            loss_norm: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(ModelError::Config(
                "learning-rate must be finite and >= 0".into(),
            ));
        }
        if self.epochs < 1 {
            return Err(ModelError::Config("epochs must be >= 1".into()));
        }
        if self.layers < 1 || self.hidden < 1 {
            return Err(ModelError::Config("layers and hidden must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mean+max pooling over rows: `h_G = MeanPool(X) + MaxPool(X)`.
pub fn readout(x: &ArrayView2<f64>) -> Result<Array1<f64>, ModelError> {
    if x.nrows() == 0 {
        return Err(ModelError::EmptyGraph);
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let max = x.fold_axis(Axis(0), f64::NEG_INFINITY, |&acc, &v| acc.max(v));
    Ok(mean + max)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "cosine over {} vs {} dims",
            a.len(),
            b.len()
        )));
    }
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(ModelError::ZeroNorm);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Row-wise numerically stable softmax.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}
