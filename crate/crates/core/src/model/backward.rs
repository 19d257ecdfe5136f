use ndarray::{Array1, Array2, Axis};

use crate::graph::CircuitGraph;
use crate::sampler::Subgraph;

use super::forward::{gnn_forward_trace, mlp_forward, ActiveGraph, ForwardTrace};
use super::{softmax_rows, MlpParams, ModelError, ModelParams, PROB_CLAMP};

/// What the loss is computed over.
#[derive(Debug, Clone, Copy)]
pub enum Task<'a> {
    /// Per-node cross-entropy. `targets` is indexed by parent-graph node id
    /// and must cover every node of the graph.
    Node { targets: &'a [usize] },
    /// Single cross-entropy term on the readout classifier.
    Graph { target: usize },
}

fn relu_mask(pre: &Array2<f64>) -> Array2<f64> {
    pre.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

/// Accumulates MLP gradients and returns the gradient w.r.t. the input.
fn mlp_backward(
    head: &MlpParams,
    grads: &mut MlpParams,
    x: &Array2<f64>,
    pre1: &Array2<f64>,
    dlogits: &Array2<f64>,
) -> Array2<f64> {
    let h1 = pre1.mapv(|v| v.max(0.0));
    grads.w2 = &grads.w2 + &h1.t().dot(dlogits);
    grads.b2 = &grads.b2 + &dlogits.sum_axis(Axis(0));
    let dh1 = dlogits.dot(&head.w2.t());
    let dpre1 = dh1 * relu_mask(pre1);
    grads.w1 = &grads.w1 + &x.t().dot(&dpre1);
    grads.b1 = &grads.b1 + &dpre1.sum_axis(Axis(0));
    dpre1.dot(&head.w1.t())
}

fn check_target(t: usize, num_classes: usize) -> Result<(), ModelError> {
    if t >= num_classes {
        return Err(ModelError::ShapeMismatch(format!(
            "target class {t} out of range for {num_classes} classes"
        )));
    }
    Ok(())
}

fn node_loss(
    p: &ModelParams,
    grads: &mut ModelParams,
    active: &ActiveGraph,
    z: &Array2<f64>,
    targets: &[usize],
) -> Result<(f64, Array2<f64>), ModelError> {
    if targets.len() < *active.nodes.iter().max().unwrap() + 1 {
        return Err(ModelError::ShapeMismatch(format!(
            "{} targets for graph nodes up to {}",
            targets.len(),
            active.nodes.iter().max().unwrap()
        )));
    }
    let (pre1, logits) = mlp_forward(&p.node_head, z);
    let probs = softmax_rows(&logits);
    let weight_sum: f64 = active.weights.iter().sum();
    let mut loss = 0.0;
    let mut dlogits = probs.clone();
    for (i, &v) in active.nodes.iter().enumerate() {
        let t = targets[v];
        check_target(t, p.dims.num_classes)?;
        let w = active.weights[i] / weight_sum;
        loss -= w * probs[[i, t]].max(PROB_CLAMP).ln();
        dlogits[[i, t]] -= 1.0;
        for c in 0..p.dims.num_classes {
            dlogits[[i, c]] *= w;
        }
    }
    let dz = mlp_backward(&p.node_head, &mut grads.node_head, z, &pre1, &dlogits);
    Ok((loss, dz))
}

fn graph_loss(
    p: &ModelParams,
    grads: &mut ModelParams,
    z: &Array2<f64>,
    target: usize,
) -> Result<(f64, Array2<f64>), ModelError> {
    check_target(target, p.dims.num_classes)?;
    let r = super::readout(&z.view())?;
    let n = z.nrows() as f64;
    // First row attaining each column maximum receives the max-pool gradient.
    let argmax: Vec<usize> = (0..z.ncols())
        .map(|j| {
            let col = z.column(j);
            let mut best = 0;
            for v in 1..col.len() {
                if col[v] > col[best] {
                    best = v;
                }
            }
            best
        })
        .collect();
    let r2 = r.insert_axis(Axis(0));
    let (pre1, logits) = mlp_forward(&p.graph_head, &r2);
    let probs = softmax_rows(&logits);
    let loss = -probs[[0, target]].max(PROB_CLAMP).ln();
    let mut dlogits = probs;
    dlogits[[0, target]] -= 1.0;
    let dr = mlp_backward(&p.graph_head, &mut grads.graph_head, &r2, &pre1, &dlogits);
    let mut dz = Array2::zeros(z.raw_dim());
    for j in 0..z.ncols() {
        let g = dr[[0, j]];
        for v in 0..z.nrows() {
            dz[[v, j]] += g / n; // mean-pool path
        }
        dz[[argmax[j], j]] += g; // max-pool path
    }
    Ok((loss, dz))
}

/// Loss and full parameter gradient for one graph (optionally restricted to
/// a sampled subgraph), computed by hand-written reverse mode.
pub fn loss_and_grad(
    p: &ModelParams,
    g: &CircuitGraph,
    restrict: Option<&Subgraph>,
    task: Task,
) -> Result<(f64, ModelParams), ModelError> {
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
    let trace: ForwardTrace = gnn_forward_trace(p, &active);
    let z = trace.z().clone();
    let mut grads = p.zeros_like();
    let (loss, dz) = match task {
        Task::Node { targets } => node_loss(p, &mut grads, &active, &z, targets)?,
        Task::Graph { target } => graph_loss(p, &mut grads, &z, target)?,
    };

    let mut dh = dz;
    for k in (0..p.layers.len()).rev() {
        let layer = &p.layers[k];
        let dpre = &dh * &relu_mask(&trace.pre[k]);
        grads.layers[k].w_self = &grads.layers[k].w_self + &trace.h[k].t().dot(&dpre);
        grads.layers[k].w_neigh = &grads.layers[k].w_neigh + &trace.m[k].t().dot(&dpre);
        grads.layers[k].bias = &grads.layers[k].bias + &dpre.sum_axis(Axis(0));
        let dm = dpre.dot(&layer.w_neigh.t());
        let mut dprev = dpre.dot(&layer.w_self.t());
        // Transpose of the neighbor mean: each node v spreads dm_v evenly
        // back over its neighbors.
        for (v, neigh) in active.adj.iter().enumerate() {
            if neigh.is_empty() {
                continue;
            }
            let scale = 1.0 / neigh.len() as f64;
            let contribution: Array1<f64> = dm.row(v).mapv(|x| x * scale);
            for &u in neigh {
                let mut row = dprev.row_mut(u);
                row += &contribution;
            }
        }
        dh = dprev;
    }
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    /// Parameters compared.
    pub checked: usize,
    /// Largest `|analytic - numeric| / max(1, |analytic| + |numeric|)`.
    pub max_rel_err: f64,
    /// Largest absolute difference.
    pub max_abs_err: f64,
}

/// Central-difference check of [`loss_and_grad`] over every parameter.
/// Intended for small dimensions; cost is two forward passes per parameter.
pub fn grad_check(
    p: &ModelParams,
    g: &CircuitGraph,
    restrict: Option<&Subgraph>,
    task: Task,
    eps: f64,
) -> Result<GradCheckReport, ModelError> {
    let (_, analytic) = loss_and_grad(p, g, restrict, task)?;
    let flat = analytic.to_flat();
    let mut work = p.clone();
    let mut max_rel: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for (i, &a) in flat.iter().enumerate() {
        work.add_at(i, eps);
        let (lp, _) = loss_and_grad(&work, g, restrict, task)?;
        work.add_at(i, -2.0 * eps);
        let (lm, _) = loss_and_grad(&work, g, restrict, task)?;
        work.add_at(i, eps);
        let numeric = (lp - lm) / (2.0 * eps);
        let abs = (a - numeric).abs();
        let rel = abs / (a.abs() + numeric.abs()).max(1.0);
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(rel);
    }
    Ok(GradCheckReport {
        checked: flat.len(),
        max_rel_err: max_rel,
        max_abs_err: max_abs,
    })
}
