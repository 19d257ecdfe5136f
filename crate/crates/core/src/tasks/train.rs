use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{CircuitGraph, FEATURE_DIM};
use crate::model::{
    gnn_forward, loss_and_grad, node_head, ModelDims, ModelParams, Optimizer, Task, TrainConfig,
};
use crate::sampler::{estimate_loss_weights, random_walk_sample, SamplerConfig};

use super::metrics::{binary_prf, evaluate_predictions, EvalReport};
use super::TasksError;

fn check_corpus(graphs: &[CircuitGraph]) -> Result<&[String], TasksError> {
    let first = graphs
        .first()
        .ok_or_else(|| TasksError::Config("empty training corpus".into()))?;
    for g in graphs {
        if g.class_names != first.class_names {
            return Err(TasksError::Config(format!(
                "graph `{}` has a different class list",
                g.name
            )));
        }
        if g.node_count() == 0 {
            return Err(TasksError::Config(format!("graph `{}` is empty", g.name)));
        }
    }
    Ok(&first.class_names)
}

struct Sgd {
    velocity: Option<ModelParams>,
    lr: f64,
    momentum: f64,
}

impl Sgd {
    fn new(tc: &TrainConfig, template: &ModelParams) -> Sgd {
        Sgd {
            velocity: match tc.optimizer {
                Optimizer::Sgd => None,
                Optimizer::Momentum => Some(template.zeros_like()),
            },
            lr: tc.learning_rate,
            momentum: 0.9,
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) {
        match &mut self.velocity {
            None => params.axpy(-self.lr, grads),
            Some(v) => {
                v.scale(self.momentum);
                v.axpy(-self.lr, grads);
                params.axpy(1.0, v);
            }
        }
    }
}

/// Trains the node classifier with random-walk subgraph minibatches.
/// Returns the trained parameters and the per-epoch mean loss history.
pub fn train_node(
    graphs: &[CircuitGraph],
    tc: &TrainConfig,
    sc: &SamplerConfig,
) -> Result<(ModelParams, Vec<f64>), TasksError> {
    tc.validate()?;
    let classes = check_corpus(graphs)?;
    let dims = ModelDims::new(FEATURE_DIM, tc.hidden, tc.layers, classes.len());
    let mut params = ModelParams::init(dims, tc.seed);
    let mut opt = Sgd::new(tc, &params);
    // Inclusion-frequency loss weights, estimated once per graph.
    let weights: Vec<Option<Vec<f64>>> = graphs
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            if tc.loss_norm {
                let cfg = SamplerConfig {
                    seed: sc.seed.wrapping_add(gi as u64),
                    ..sc.clone()
                };
                Some(estimate_loss_weights(g, &cfg))
            } else {
                None
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed.wrapping_add(1));
    let mut history = Vec::with_capacity(tc.epochs);
    for _epoch in 0..tc.epochs {
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (gi, g) in graphs.iter().enumerate() {
            for _ in 0..tc.subgraphs_per_graph.max(1) {
                let mut sub = random_walk_sample(g, sc, &mut rng);
                if let Some(w) = &weights[gi] {
                    sub.apply_weights(w);
                }
                let (loss, grads) =
                    loss_and_grad(&params, g, Some(&sub), Task::Node { targets: &g.labels })?;
                opt.step(&mut params, &grads);
                loss_sum += loss;
                batches += 1;
            }
        }
        history.push(loss_sum / batches as f64);
    }
    Ok((params, history))
}

/// Per-node argmax predictions from a full-graph forward pass.
pub fn predict_nodes(params: &ModelParams, g: &CircuitGraph) -> Result<Vec<usize>, TasksError> {
    let z = gnn_forward(params, g, None)?;
    let probs = node_head(params, &z);
    Ok(probs
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect())
}

/// Evaluates node classification over full graphs (no sampling).
pub fn eval_node(params: &ModelParams, graphs: &[CircuitGraph]) -> Result<EvalReport, TasksError> {
    let classes = check_corpus(graphs)?.to_vec();
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for g in graphs {
        labels.extend_from_slice(&g.labels);
        preds.extend(predict_nodes(params, g)?);
    }
    Ok(evaluate_predictions(&labels, &preds, &classes))
}

/// Graph-level label convention: the majority node label, ties to the
/// smallest class id.
pub fn graph_label(g: &CircuitGraph) -> usize {
    let mut counts = vec![0usize; g.class_names.len()];
    for &l in &g.labels {
        counts[l] += 1;
    }
    counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap()
}

/// Trains the graph-level classifier on full graphs.
pub fn train_graph(
    graphs: &[CircuitGraph],
    tc: &TrainConfig,
) -> Result<(ModelParams, Vec<f64>), TasksError> {
    tc.validate()?;
    let classes = check_corpus(graphs)?;
    let dims = ModelDims::new(FEATURE_DIM, tc.hidden, tc.layers, classes.len());
    let mut params = ModelParams::init(dims, tc.seed);
    let mut opt = Sgd::new(tc, &params);
    let targets: Vec<usize> = graphs.iter().map(graph_label).collect();
    let mut history = Vec::with_capacity(tc.epochs);
    for _epoch in 0..tc.epochs {
        let mut loss_sum = 0.0;
        for (g, &target) in graphs.iter().zip(&targets) {
            let (loss, grads) = loss_and_grad(&params, g, None, Task::Graph { target })?;
            opt.step(&mut params, &grads);
            loss_sum += loss;
        }
        history.push(loss_sum / graphs.len() as f64);
    }
    Ok((params, history))
}

/// Predicted graph-level class.
pub fn predict_graph(params: &ModelParams, g: &CircuitGraph) -> Result<usize, TasksError> {
    let z = gnn_forward(params, g, None)?;
    let probs = crate::model::graph_head(params, &z)?;
    Ok(probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap())
}

/// Evaluates graph classification.
pub fn eval_graph(params: &ModelParams, graphs: &[CircuitGraph]) -> Result<EvalReport, TasksError> {
    let classes = check_corpus(graphs)?.to_vec();
    let labels: Vec<usize> = graphs.iter().map(graph_label).collect();
    let preds: Vec<usize> = graphs
        .iter()
        .map(|g| predict_graph(params, g))
        .collect::<Result<_, _>>()?;
    Ok(evaluate_predictions(&labels, &preds, &classes))
}

/// Binary precision/recall/F1 of `target_class` versus everything else over
/// one graph's node predictions.
pub fn boundary_report(
    params: &ModelParams,
    g: &CircuitGraph,
    target_class: &str,
) -> Result<(f64, f64, f64), TasksError> {
    let target = g
        .class_names
        .iter()
        .position(|c| c == target_class)
        .ok_or_else(|| TasksError::UnknownClass(target_class.to_string()))?;
    let preds = predict_nodes(params, g)?;
    Ok(binary_prf(&g.labels, &preds, target))
}

/// The same report over multiple graphs pooled together.
pub fn boundary_report_many(
    params: &ModelParams,
    graphs: &[CircuitGraph],
    target_class: &str,
) -> Result<(f64, f64, f64), TasksError> {
    let first = graphs
        .first()
        .ok_or_else(|| TasksError::Config("no graphs".into()))?;
    let target = first
        .class_names
        .iter()
        .position(|c| c == target_class)
        .ok_or_else(|| TasksError::UnknownClass(target_class.to_string()))?;
    let mut labels = Vec::new();
    let mut preds = Vec::new();
    for g in graphs {
        labels.extend_from_slice(&g.labels);
        preds.extend(predict_nodes(params, g)?);
    }
    Ok(binary_prf(&labels, &preds, target))
}
