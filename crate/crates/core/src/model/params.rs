use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub d_in: usize,
    pub hidden: usize,
    /// Number of message-passing layers (K).
    pub layers: usize,
    pub num_classes: usize,
}

impl ModelDims {
    pub fn new(d_in: usize, hidden: usize, layers: usize, num_classes: usize) -> ModelDims {
        ModelDims {
            d_in,
            hidden,
            layers,
            num_classes,
        }
    }
}

/// One message-passing layer: `h' = ReLU(W_self h + W_neigh m + b)` where
/// `m` is the neighbor mean. Weights are stored input-major (`in x out`).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub w_self: Array2<f64>,
    pub w_neigh: Array2<f64>,
    pub bias: Array1<f64>,
}

/// One-hidden-layer MLP head: `logits = ReLU(x W1 + b1) W2 + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub layers: Vec<LayerParams>,
    /// Per-node classifier over embeddings.
    pub node_head: MlpParams,
    /// Graph-level classifier over the readout (mean and max pools are
    /// summed, so the readout keeps `hidden` columns).
    pub graph_head: MlpParams,
}

fn init_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = 1.0 / (rows as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound);
    Array2::from_shape_fn((rows, cols), |_| dist.sample(rng))
}

fn init_vec(rng: &mut ChaCha8Rng, fan_in: usize, len: usize) -> Array1<f64> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound);
    Array1::from_shape_fn(len, |_| dist.sample(rng))
}

fn init_mlp(rng: &mut ChaCha8Rng, d_in: usize, hidden: usize, d_out: usize) -> MlpParams {
    MlpParams {
        w1: init_mat(rng, d_in, hidden),
        b1: init_vec(rng, d_in, hidden),
        w2: init_mat(rng, hidden, d_out),
        b2: init_vec(rng, hidden, d_out),
    }
}

impl ModelParams {
    /// Seeded uniform init in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, fill order
    /// fixed so the same seed always yields the same parameters.
    pub fn init(dims: ModelDims, seed: u64) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(dims.layers);
        for k in 0..dims.layers {
            let d_in = if k == 0 { dims.d_in } else { dims.hidden };
            layers.push(LayerParams {
                w_self: init_mat(&mut rng, d_in, dims.hidden),
                w_neigh: init_mat(&mut rng, d_in, dims.hidden),
                bias: init_vec(&mut rng, d_in, dims.hidden),
            });
        }
        let node_head = init_mlp(&mut rng, dims.hidden, dims.hidden, dims.num_classes);
        let graph_head = init_mlp(&mut rng, dims.hidden, dims.hidden, dims.num_classes);
        ModelParams {
            dims,
            layers,
            node_head,
            graph_head,
        }
    }

    /// Same shapes, all parameters zero. Used for gradients and momentum.
    pub fn zeros_like(&self) -> ModelParams {
        let mut z = self.clone();
        z.for_each_mut(|v| *v = 0.0);
        z
    }

    /// Visits every parameter in the canonical flat order: per layer
    /// `w_self, w_neigh, bias` (row-major), then the node head, then the
    /// graph head (each `w1, b1, w2, b2`).
    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for l in &mut self.layers {
            for v in l.w_self.iter_mut() {
                f(v);
            }
            for v in l.w_neigh.iter_mut() {
                f(v);
            }
            for v in l.bias.iter_mut() {
                f(v);
            }
        }
        for head in [&mut self.node_head, &mut self.graph_head] {
            for v in head.w1.iter_mut() {
                f(v);
            }
            for v in head.b1.iter_mut() {
                f(v);
            }
            for v in head.w2.iter_mut() {
                f(v);
            }
            for v in head.b2.iter_mut() {
                f(v);
            }
        }
    }

    pub fn for_each(&self, mut f: impl FnMut(f64)) {
        for l in &self.layers {
            for &v in l.w_self.iter() {
                f(v);
            }
            for &v in l.w_neigh.iter() {
                f(v);
            }
            for &v in l.bias.iter() {
                f(v);
            }
        }
        for head in [&self.node_head, &self.graph_head] {
            for &v in head.w1.iter() {
                f(v);
            }
            for &v in head.b1.iter() {
                f(v);
            }
            for &v in head.w2.iter() {
                f(v);
            }
            for &v in head.b2.iter() {
                f(v);
            }
        }
    }

    pub fn flat_len(&self) -> usize {
        let mut n = 0;
        self.for_each(|_| n += 1);
        n
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flat_len());
        self.for_each(|v| out.push(v));
        out
    }

    /// Loads parameters from a flat vector in canonical order.
    pub fn assign_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.flat_len(), "flat parameter length");
        let mut it = flat.iter();
        self.for_each_mut(|v| *v = *it.next().unwrap());
    }

    pub fn get_flat(&self, idx: usize) -> f64 {
        let mut i = 0;
        let mut out = f64::NAN;
        self.for_each(|v| {
            if i == idx {
                out = v;
            }
            i += 1;
        });
        assert!(!out.is_nan() || idx < i, "flat index out of range");
        out
    }

    pub fn add_at(&mut self, idx: usize, delta: f64) {
        let mut i = 0;
        self.for_each_mut(|v| {
            if i == idx {
                *v += delta;
            }
            i += 1;
        });
    }

    /// `self += alpha * other`, elementwise over matching shapes.
    pub fn axpy(&mut self, alpha: f64, other: &ModelParams) {
        let flat = other.to_flat();
        let mut it = flat.iter();
        self.for_each_mut(|v| *v += alpha * it.next().unwrap());
    }

    pub fn scale(&mut self, alpha: f64) {
        self.for_each_mut(|v| *v *= alpha);
    }
}
