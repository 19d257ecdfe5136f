//! Netlist-level filtering stages and the architecture vote.

use std::collections::BTreeMap;

use crate::graph::{CircuitGraph, FEAT_IN_DEGREE, FEAT_OUT_DEGREE};
use crate::model::{cosine_similarity, readout};
use crate::netlist::FlatNetlist;

use super::client::{GeneratorClient, VoteCandidate};
use super::{AugmentError, Stage, StageOutcome, Verdict};

/// Knobs for the structural-similarity embedding.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimilarityConfig {
    /// Divisor applied to the degree feature columns before pooling, so the
    /// function-mix columns carry comparable weight in the readout. Set to
    /// 1.0 to disable the normalization.
    pub degree_scale: f64,
    /// Post-pooling weight on the structural columns (PI/PO flags and
    /// degrees). Degree-preserving rewiring leaves these columns nearly
    /// unchanged, so at full weight they put a high floor under every
    /// cosine; damping them lets the function mix discriminate.
    pub structure_weight: f64,
    /// Weight on the max-pool contribution of the function one-hot columns.
    /// Max-pooled one-hot columns are presence bits, and a sprinkle of
    /// corruption flips them almost as hard as wholesale scrambling does;
    /// the mean function mix is the component that actually separates the
    /// two, so the presence bits are damped by default.
    pub presence_weight: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            degree_scale: 4.0,
            structure_weight: 0.1,
            presence_weight: 0.25,
        }
    }
}

/// Mean+max readout over the node feature matrix, with degree columns
/// rescaled and function-presence bits damped per `cfg`. This is the graph
/// embedding the similarity filter compares.
pub fn structural_embedding(
    g: &CircuitGraph,
    cfg: &SimilarityConfig,
) -> Result<Vec<f64>, AugmentError> {
    if g.node_count() == 0 {
        return Err(AugmentError::Model(crate::model::ModelError::EmptyGraph));
    }
    let dim = g.features[0].len();
    let mut x = ndarray::Array2::zeros((g.node_count(), dim));
    for (v, row) in g.features.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            let scaled = if j == FEAT_IN_DEGREE || j == FEAT_OUT_DEGREE {
                f / cfg.degree_scale
            } else {
                f
            };
            x[[v, j]] = scaled;
        }
    }
    let mut h = readout(&x.view())?.to_vec();
    // `readout` sums mean- and max-pool per column; re-derive the mean of
    // the one-hot columns so their max contribution can be reweighted, and
    // damp the structural columns as configured.
    for (j, v) in h.iter_mut().enumerate() {
        if j < crate::graph::FEAT_ONE_HOT {
            *v *= cfg.structure_weight;
        } else {
            let col = x.column(j);
            let mean = col.sum() / col.len() as f64;
            let max = col.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            *v = mean + cfg.presence_weight * max;
        }
    }
    Ok(h)
}

/// Cosine similarity of two graphs' structural embeddings.
pub fn similarity(
    a: &CircuitGraph,
    b: &CircuitGraph,
    cfg: &SimilarityConfig,
) -> Result<f64, AugmentError> {
    let ha = structural_embedding(a, cfg)?;
    let hb = structural_embedding(b, cfg)?;
    Ok(cosine_similarity(&ha, &hb)?)
}

/// Discards candidates whose gate count falls below `rho` times their
/// class's mean over the incoming pool. Kept order matches input order; the
/// returned outcomes are index-aligned with `candidates`.
pub fn cell_count_filter(
    candidates: &[(String, FlatNetlist)],
    rho: f64,
) -> (Vec<usize>, Vec<StageOutcome>) {
    let mut sums: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for (class, flat) in candidates {
        let e = sums.entry(class).or_insert((0.0, 0.0));
        e.0 += flat.gate_count() as f64;
        e.1 += 1.0;
    }
    let means: BTreeMap<&str, f64> = sums
        .into_iter()
        .map(|(c, (sum, n))| (c, sum / n))
        .collect();
    let mut kept = Vec::new();
    let mut outcomes = Vec::with_capacity(candidates.len());
    for (i, (class, flat)) in candidates.iter().enumerate() {
        let mean = means[class.as_str()];
        let count = flat.gate_count() as f64;
        let floor = rho * mean;
        if count < floor {
            outcomes.push(StageOutcome {
                stage: Stage::CellCount,
                verdict: Verdict::Discarded,
                score: Some(count),
                reason: format!("gate count {count} below {rho} x class mean {mean:.2}"),
            });
        } else {
            kept.push(i);
            outcomes.push(StageOutcome {
                stage: Stage::CellCount,
                verdict: Verdict::Kept,
                score: Some(count),
                reason: format!("gate count {count} meets floor {floor:.2}"),
            });
        }
    }
    (kept, outcomes)
}

/// Keeps candidates whose embedding similarity to the golden graph is at
/// least `tau`. Outcomes are index-aligned with `candidates`.
pub fn similarity_filter(
    golden: &CircuitGraph,
    candidates: &[CircuitGraph],
    tau: f64,
    cfg: &SimilarityConfig,
) -> Result<(Vec<usize>, Vec<StageOutcome>), AugmentError> {
    let h_gold = structural_embedding(golden, cfg)?;
    let mut kept = Vec::new();
    let mut outcomes = Vec::with_capacity(candidates.len());
    for (i, cand) in candidates.iter().enumerate() {
        let h = structural_embedding(cand, cfg)?;
        let sim = cosine_similarity(&h_gold, &h)?;
        if sim >= tau {
            kept.push(i);
            outcomes.push(StageOutcome {
                stage: Stage::Similarity,
                verdict: Verdict::Kept,
                score: Some(sim),
                reason: format!("similarity {sim:.4} >= tau {tau}"),
            });
        } else {
            outcomes.push(StageOutcome {
                stage: Stage::Similarity,
                verdict: Verdict::Discarded,
                score: Some(sim),
                reason: format!("similarity {sim:.4} < tau {tau}"),
            });
        }
    }
    Ok((kept, outcomes))
}

/// Scores the batch through the client and keeps the `k` highest, ties
/// broken by ascending design id. Returns the winning ids in score order
/// plus outcomes index-aligned with `batch`.
pub fn architecture_vote(
    batch: &[VoteCandidate],
    client: &dyn GeneratorClient,
    k: usize,
) -> Result<(Vec<usize>, Vec<StageOutcome>), AugmentError> {
    assert!(!batch.is_empty() && k <= batch.len(), "vote preconditions");
    let scores = client.evaluate(batch)?;
    if scores.len() != batch.len() {
        return Err(AugmentError::EvaluatorFailure(format!(
            "{} scores for {} designs",
            scores.len(),
            batch.len()
        )));
    }
    let mut order: Vec<usize> = (0..batch.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(batch[a].id.cmp(&batch[b].id))
    });
    let winners: Vec<usize> = order[..k].to_vec();
    let mut outcomes = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let won = winners.contains(&i);
        outcomes.push(StageOutcome {
            stage: Stage::Vote,
            verdict: if won { Verdict::Kept } else { Verdict::Discarded },
            score: Some(scores[i]),
            reason: format!(
                "score {:.4}, rank {} of {}",
                scores[i],
                order.iter().position(|&j| j == i).unwrap() + 1,
                batch.len()
            ),
        });
    }
    Ok((winners.iter().map(|&i| batch[i].id).collect(), outcomes))
}
