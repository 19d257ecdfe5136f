use ndarray::{Array1, Array2, Axis};

use crate::graph::CircuitGraph;
use crate::sampler::Subgraph;

use super::{softmax_rows, ModelError, ModelParams};

/// The node set a forward pass runs over: either a whole [`CircuitGraph`]
/// or a sampled [`Subgraph`], reindexed to dense local ids.
#[derive(Debug, Clone)]
pub struct ActiveGraph {
    /// Parent-graph node id for each local row.
    pub nodes: Vec<usize>,
    /// Adjacency over local ids.
    pub adj: Vec<Vec<usize>>,
    /// One feature row per local node.
    pub features: Array2<f64>,
    /// Per-node loss weights aligned with `nodes`.
    pub weights: Vec<f64>,
}

impl ActiveGraph {
    pub fn full(g: &CircuitGraph) -> Result<ActiveGraph, ModelError> {
        ActiveGraph::build(g, &Subgraph::full(g))
    }

    pub fn restricted(g: &CircuitGraph, sub: &Subgraph) -> Result<ActiveGraph, ModelError> {
        ActiveGraph::build(g, sub)
    }

    fn build(g: &CircuitGraph, sub: &Subgraph) -> Result<ActiveGraph, ModelError> {
        if sub.nodes.is_empty() {
            return Err(ModelError::EmptyGraph);
        }
        let local = |v: usize| -> usize {
            sub.nodes
                .binary_search(&v)
                .expect("subgraph edge endpoint outside node set")
        };
        let mut adj = vec![Vec::new(); sub.nodes.len()];
        for &(u, v) in &sub.edges {
            let (lu, lv) = (local(u), local(v));
            adj[lu].push(lv);
            adj[lv].push(lu);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut features = Array2::zeros((sub.nodes.len(), g.features[0].len()));
        for (i, &v) in sub.nodes.iter().enumerate() {
            for (j, &f) in g.features[v].iter().enumerate() {
                features[[i, j]] = f;
            }
        }
        Ok(ActiveGraph {
            nodes: sub.nodes.clone(),
            adj,
            features,
            weights: sub.weights.clone(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `h[0]` is the input feature matrix, `h[k]` the post-ReLU output of
    /// layer `k`. Length `K + 1`.
    pub h: Vec<Array2<f64>>,
    /// Neighbor-mean matrix fed into layer `k` (index `k - 1`).
    pub m: Vec<Array2<f64>>,
    /// Pre-activation of layer `k` (index `k - 1`).
    pub pre: Vec<Array2<f64>>,
}

impl ForwardTrace {
    /// Final embedding matrix `Z`.
    pub fn z(&self) -> &Array2<f64> {
        self.h.last().expect("at least the input layer")
    }
}

fn neighbor_mean(h: &Array2<f64>, adj: &[Vec<usize>]) -> Array2<f64> {
    let mut m = Array2::zeros(h.raw_dim());
    for (v, neigh) in adj.iter().enumerate() {
        if neigh.is_empty() {
            continue; // empty neighborhood contributes a zero vector
        }
        let mut acc = Array1::zeros(h.ncols());
        for &u in neigh {
            acc += &h.row(u);
        }
        acc /= neigh.len() as f64;
        m.row_mut(v).assign(&acc);
    }
    m
}

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Runs all K message-passing layers over `active`, returning the cached
/// activations. `h^k_v = ReLU(W_self h^{k-1}_v + W_neigh mean(h^{k-1}_u) + b)`.
pub fn gnn_forward_trace(p: &ModelParams, active: &ActiveGraph) -> ForwardTrace {
    let mut h = vec![active.features.clone()];
    let mut m = Vec::with_capacity(p.layers.len());
    let mut pre = Vec::with_capacity(p.layers.len());
    for layer in &p.layers {
        let prev = h.last().unwrap();
        let mk = neighbor_mean(prev, &active.adj);
        let pk = prev.dot(&layer.w_self) + mk.dot(&layer.w_neigh) + &layer.bias;
        h.push(relu(&pk));
        m.push(mk);
        pre.push(pk);
    }
    ForwardTrace { h, m, pre }
}

/// Node embeddings for a graph, optionally restricted to a subgraph.
pub fn gnn_forward(
    p: &ModelParams,
    g: &CircuitGraph,
    restrict: Option<&Subgraph>,
) -> Result<Array2<f64>, ModelError> {
    let active = match restrict {
        Some(sub) => ActiveGraph::restricted(g, sub)?,
        None => ActiveGraph::full(g)?,
    };
    if active.features.ncols() != p.dims.d_in {
        return Err(ModelError::ShapeMismatch(format!(
            "features have {} columns, model expects {}",
            active.features.ncols(),
            p.dims.d_in
        )));
    }
    let mut trace = gnn_forward_trace(p, &active);
    Ok(trace.h.pop().expect("at least the input layer"))
}

pub(super) fn mlp_forward(head: &super::MlpParams, x: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let pre1 = x.dot(&head.w1) + &head.b1;
    let h1 = relu(&pre1);
    let logits = h1.dot(&head.w2) + &head.b2;
    (pre1, logits)
}

/// Per-node class probabilities.
pub fn node_head(p: &ModelParams, z: &Array2<f64>) -> Array2<f64> {
    let (_, logits) = mlp_forward(&p.node_head, z);
    softmax_rows(&logits)
}

/// Graph-level class probabilities from the mean+max readout of `z`.
pub fn graph_head(p: &ModelParams, z: &Array2<f64>) -> Result<Array1<f64>, ModelError> {
    let r = super::readout(&z.view())?;
    let r2 = r.insert_axis(Axis(0));
    let (_, logits) = mlp_forward(&p.graph_head, &r2);
    Ok(softmax_rows(&logits).row(0).to_owned())
}
