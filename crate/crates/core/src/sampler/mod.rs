//! GraphSAINT-style random-walk subgraph sampling with inclusion-frequency
//! loss normalization.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::CircuitGraph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Walk roots drawn per sample, with replacement.
    pub roots: usize,
    /// Steps taken from each root.
    pub walk_length: usize,
    /// Sampling rounds used to estimate inclusion frequencies.
    pub rounds: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            roots: 50,
            walk_length: 4,
            rounds: 100,
            seed: 0,
        }
    }
}

/// A node-induced subgraph. Nodes and edges keep the parent graph's ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    /// Sorted, deduplicated node ids from the parent graph.
    pub nodes: Vec<usize>,
    /// Induced edges, endpoints in parent-graph ids, u < v, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Per-node loss weights aligned with `nodes`; 1.0 until normalized.
    pub weights: Vec<f64>,
}

impl Subgraph {
    pub fn induced(g: &CircuitGraph, mut nodes: Vec<usize>) -> Subgraph {
        nodes.sort_unstable();
        nodes.dedup();
        let edges: Vec<(usize, usize)> = g
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| nodes.binary_search(&u).is_ok() && nodes.binary_search(&v).is_ok())
            .collect();
        let weights = vec![1.0; nodes.len()];
        Subgraph {
            nodes,
            edges,
            weights,
        }
    }

    pub fn full(g: &CircuitGraph) -> Subgraph {
        Subgraph::induced(g, (0..g.node_count()).collect())
    }

    /// Fills `weights` from a parent-graph weight vector.
    pub fn apply_weights(&mut self, graph_weights: &[f64]) {
        for (i, &v) in self.nodes.iter().enumerate() {
            self.weights[i] = graph_weights[v];
        }
    }
}

/// Draws one random-walk sample: `roots` start nodes chosen uniformly with
/// replacement, each walked `walk_length` steps over the undirected graph.
/// Isolated nodes simply stay put. The union of visited nodes induces the
/// subgraph.
pub fn random_walk_sample(
    g: &CircuitGraph,
    cfg: &SamplerConfig,
    rng: &mut impl Rng,
) -> Subgraph {
    let n = g.node_count();
    assert!(n > 0, "cannot sample from an empty graph");
    let adj = g.adjacency();
    let mut visited: Vec<usize> = Vec::with_capacity(cfg.roots * (cfg.walk_length + 1));
    for _ in 0..cfg.roots {
        let mut cur = rng.gen_range(0..n);
        visited.push(cur);
        for _ in 0..cfg.walk_length {
            if !adj[cur].is_empty() {
                cur = adj[cur][rng.gen_range(0..adj[cur].len())];
            }
            visited.push(cur);
        }
    }
    Subgraph::induced(g, visited)
}

/// Runs `cfg.rounds` samples and returns per-node loss weights
/// `w_v = rounds / max(C_v, 1)` where `C_v` counts the rounds that included
/// node `v`. Deterministic in `cfg.seed`.
pub fn estimate_loss_weights(g: &CircuitGraph, cfg: &SamplerConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = vec![0usize; g.node_count()];
    for _ in 0..cfg.rounds {
        let sub = random_walk_sample(g, cfg, &mut rng);
        for &v in &sub.nodes {
            counts[v] += 1;
        }
    }
    counts
        .iter()
        .map(|&c| cfg.rounds as f64 / c.max(1) as f64)
        .collect()
}
