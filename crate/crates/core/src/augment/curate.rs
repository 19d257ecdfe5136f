//! End-to-end curation: generate/repair, cell-count filter, then per-class
//! similarity filtering and architecture voting, with a full provenance
//! ledger.

use std::collections::BTreeMap;

use crate::graph::{to_graph_with_classes, CircuitGraph};
use crate::netlist::{flatten, CellLibrary, FlatNetlist, LabelMap, UNMAPPED_CLASS};

use super::client::{GeneratorClient, VoteCandidate};
use super::corrupt::random_netlist;
use super::filters::{
    architecture_vote, cell_count_filter, similarity_filter, structural_embedding,
    SimilarityConfig,
};
use super::generators::synth_generate;
use super::repair::{default_top, repair_loop};
use super::{
    AugmentError, CurationRecord, DesignSpec, Stage, StageOutcome, Verdict,
};

pub type SpecEntry = DesignSpec;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CurationConfig {
    pub specs: Vec<SpecEntry>,
    /// Candidates generated per spec.
    pub count: usize,
    pub tau: f64,
    pub rho: f64,
    /// Fraction of each class's surviving pool routed to the vote path.
    pub vote_share: f64,
    pub seed: u64,
    /// `stub`, `cmd:<command>`, or `http:<endpoint>`.
    pub client: String,
    /// Random-netlist decoys injected per spec (negative controls).
    pub decoys: usize,
    /// Vote batch size (N) and winners per batch (k).
    pub vote_batch: usize,
    pub vote_top: usize,
    pub temperature: f64,
    pub similarity: SimilarityConfig,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            specs: Vec::new(),
            count: 10,
            tau: 0.90,
            rho: 0.5,
            vote_share: 0.5,
            seed: 0,
            client: "stub".into(),
            decoys: 0,
            vote_batch: 10,
            vote_top: 3,
            temperature: 0.8,
            similarity: SimilarityConfig::default(),
        }
    }
}

impl CurationConfig {
    /// Parses the key=value config format. `spec.N.class`, `spec.N.width`,
    /// `spec.N.arch` define specs; remaining keys are scalar knobs. `#`
    /// starts a comment.
    pub fn parse(text: &str) -> Result<CurationConfig, AugmentError> {
        let mut cfg = CurationConfig::default();
        let mut specs: BTreeMap<usize, SpecEntry> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AugmentError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                AugmentError::Config(format!("line {}: bad {what}: `{value}`", lineno + 1))
            };
            if let Some(rest) = key.strip_prefix("spec.") {
                let (idx, field) = rest
                    .split_once('.')
                    .ok_or_else(|| bad("spec key"))?;
                let idx: usize = idx.parse().map_err(|_| bad("spec index"))?;
                let entry = specs
                    .entry(idx)
                    .or_insert_with(|| DesignSpec::new("", 4, None));
                match field {
                    "class" => entry.class = value.to_string(),
                    "width" => entry.width = value.parse().map_err(|_| bad("width"))?,
                    "arch" => entry.architecture = Some(value.to_string()),
                    "desc" => entry.description = value.to_string(),
                    other => {
                        return Err(AugmentError::Config(format!(
                            "line {}: unknown spec field `{other}`",
                            lineno + 1
                        )))
                    }
                }
            } else {
                match key {
                    "count" => cfg.count = value.parse().map_err(|_| bad("count"))?,
                    "tau" => cfg.tau = value.parse().map_err(|_| bad("tau"))?,
                    "rho" => cfg.rho = value.parse().map_err(|_| bad("rho"))?,
                    "vote_share" => {
                        cfg.vote_share = value.parse().map_err(|_| bad("vote_share"))?
                    }
                    "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                    "client" => cfg.client = value.to_string(),
                    "decoys" => cfg.decoys = value.parse().map_err(|_| bad("decoys"))?,
                    "vote_batch" => {
                        cfg.vote_batch = value.parse().map_err(|_| bad("vote_batch"))?
                    }
                    "vote_top" => cfg.vote_top = value.parse().map_err(|_| bad("vote_top"))?,
                    "temperature" => {
                        cfg.temperature = value.parse().map_err(|_| bad("temperature"))?
                    }
                    "degree_scale" => {
                        cfg.similarity.degree_scale =
                            value.parse().map_err(|_| bad("degree_scale"))?
                    }
                    other => {
                        return Err(AugmentError::Config(format!(
                            "line {}: unknown key `{other}`",
                            lineno + 1
                        )))
                    }
                }
            }
        }
        cfg.specs = specs.into_values().collect();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.specs.is_empty() {
            return Err(AugmentError::Config("no specs configured".into()));
        }
        for s in &self.specs {
            s.validate()?;
        }
        if !(self.tau > -1.0 && self.tau <= 1.0) {
            return Err(AugmentError::Config("tau must lie in (-1, 1]".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(AugmentError::Config("rho must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.vote_share) {
            return Err(AugmentError::Config("vote_share must lie in [0, 1]".into()));
        }
        if self.vote_top > self.vote_batch || self.vote_batch == 0 {
            return Err(AugmentError::Config(
                "need 0 < vote_top <= vote_batch".into(),
            ));
        }
        Ok(())
    }

    /// All class names the curated dataset can carry, sorted, including the
    /// fallback class.
    pub fn class_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.specs.iter().map(|s| s.class.clone()).collect();
        names.push(UNMAPPED_CLASS.to_string());
        names.sort();
        names.dedup();
        names
    }
}

#[derive(Debug, Clone)]
pub struct CurationOutput {
    /// Kept designs as labeled graphs, in design-id order.
    pub graphs: Vec<CircuitGraph>,
    /// One record per candidate, kept or not, in design-id order.
    pub records: Vec<CurationRecord>,
    pub class_names: Vec<String>,
}

struct Candidate {
    id: usize,
    class: String,
    source: String,
    flat: FlatNetlist,
    record: CurationRecord,
}

/// Runs the full curation pipeline with the given client.
pub fn curate(
    cfg: &CurationConfig,
    client: &dyn GeneratorClient,
    lib: &CellLibrary,
) -> Result<CurationOutput, AugmentError> {
    cfg.validate()?;
    let class_names = cfg.class_names();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut failed_records: Vec<CurationRecord> = Vec::new();
    let mut next_id = 0usize;

    // Stage 1: generate + lint/repair.
    for spec in &cfg.specs {
        let sources = client.generate(spec, cfg.count, cfg.temperature)?;
        for source in sources {
            let id = next_id;
            next_id += 1;
            let mut record = CurationRecord {
                design_id: id,
                spec: spec.clone(),
                stages: Vec::new(),
            };
            match repair_loop(&source, lib, client, 5) {
                Ok((nl, iters)) => {
                    record.stages.push(StageOutcome {
                        stage: Stage::LintRepair,
                        verdict: Verdict::Kept,
                        score: None,
                        reason: format!("lint-clean after {iters} debug calls"),
                    });
                    let mut flat = flatten(&nl, lib, default_top(&nl), &LabelMap::default())?;
                    for g in &mut flat.gates {
                        g.label = spec.class.clone();
                    }
                    candidates.push(Candidate {
                        id,
                        class: spec.class.clone(),
                        source,
                        flat,
                        record,
                    });
                }
                Err(AugmentError::RepairExhausted { iterations, report }) => {
                    record.stages.push(StageOutcome {
                        stage: Stage::LintRepair,
                        verdict: Verdict::Discarded,
                        score: None,
                        reason: format!(
                            "repair exhausted after {iterations} iterations; {} errors remain",
                            report.error_count()
                        ),
                    });
                    failed_records.push(record);
                }
                Err(other) => return Err(other),
            }
        }
        // Negative-control decoys share the spec's class and sizing.
        for d in 0..cfg.decoys {
            let id = next_id;
            next_id += 1;
            let golden = synth_generate(spec, cfg.seed)?;
            let golden_flat = flatten(&golden.netlist, lib, &golden.top, &LabelMap::default())?;
            let mut flat = random_netlist(
                &format!("decoy{id}"),
                golden_flat.gate_count(),
                golden_flat.primary_inputs.len().max(1),
                cfg.seed ^ (((id as u64) << 16) | d as u64),
            );
            for g in &mut flat.gates {
                g.label = UNMAPPED_CLASS.to_string();
            }
            candidates.push(Candidate {
                id,
                class: spec.class.clone(),
                source: String::new(),
                flat,
                record: CurationRecord {
                    design_id: id,
                    spec: spec.clone(),
                    stages: Vec::new(),
                },
            });
        }
    }

    // Stage 2: cell-count filter over the whole pool.
    let pool: Vec<(String, FlatNetlist)> = candidates
        .iter()
        .map(|c| (c.class.clone(), c.flat.clone()))
        .collect();
    let (kept_idx, outcomes) = cell_count_filter(&pool, cfg.rho);
    for (c, o) in candidates.iter_mut().zip(outcomes) {
        c.record.stages.push(o);
    }
    let (mut survivors, rejected): (Vec<Candidate>, Vec<Candidate>) = {
        let kept: std::collections::BTreeSet<usize> = kept_idx.into_iter().collect();
        let mut s = Vec::new();
        let mut r = Vec::new();
        for (i, c) in candidates.into_iter().enumerate() {
            if kept.contains(&i) {
                s.push(c);
            } else {
                r.push(c);
            }
        }
        (s, r)
    };
    failed_records.extend(rejected.into_iter().map(|c| c.record));

    // Golden references: one correct design per class, from its first spec.
    let mut goldens: BTreeMap<String, CircuitGraph> = BTreeMap::new();
    for spec in &cfg.specs {
        if goldens.contains_key(&spec.class) {
            continue;
        }
        let g = synth_generate(spec, cfg.seed)?;
        let flat = flatten(&g.netlist, lib, &g.top, &LabelMap::default())?;
        goldens.insert(spec.class.clone(), crate::graph::to_graph(&flat));
    }

    // Stage 3: split each class's survivors between the similarity-filter
    // path and the vote path.
    let mut kept: Vec<Candidate> = Vec::new();
    let mut discarded: Vec<Candidate> = Vec::new();
    let mut by_class: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
    survivors.reverse(); // pop() below restores original order
    while let Some(c) = survivors.pop() {
        by_class.entry(c.class.clone()).or_default().push(c);
    }
    for (class, group) in by_class {
        let golden = goldens
            .get(&class)
            .ok_or(AugmentError::NoGoldenReference(class.clone()))?;
        // Decoys (empty source) always face the similarity filter; only
        // real generated designs are eligible for the vote path.
        let (decoy_part, real_part): (Vec<Candidate>, Vec<Candidate>) =
            group.into_iter().partition(|c| c.source.is_empty());
        let n = real_part.len();
        let vote_n = (cfg.vote_share * n as f64).round() as usize;
        let split = n - vote_n;
        let mut real_part = real_part;
        let vote_part: Vec<Candidate> = real_part.split_off(split);
        let mut sim_part = real_part;
        sim_part.extend(decoy_part);

        // Similarity path.
        let graphs: Vec<CircuitGraph> =
            sim_part.iter().map(|c| crate::graph::to_graph(&c.flat)).collect();
        let (kept_i, outcomes) = similarity_filter(golden, &graphs, cfg.tau, &cfg.similarity)?;
        let kept_set: std::collections::BTreeSet<usize> = kept_i.into_iter().collect();
        for (i, (mut c, o)) in sim_part.into_iter().zip(outcomes).enumerate() {
            c.record.stages.push(o);
            if kept_set.contains(&i) {
                kept.push(c);
            } else {
                discarded.push(c);
            }
        }

        // Vote path, in batches.
        let mut vote_part = vote_part;
        while !vote_part.is_empty() {
            let take = vote_part.len().min(cfg.vote_batch);
            let batch: Vec<Candidate> = vote_part.drain(..take).collect();
            let vote_batch: Vec<VoteCandidate> = batch
                .iter()
                .map(|c| {
                    let g = crate::graph::to_graph(&c.flat);
                    Ok(VoteCandidate {
                        id: c.id,
                        source: c.source.clone(),
                        embedding: structural_embedding(&g, &cfg.similarity)?,
                        gate_count: c.flat.gate_count(),
                    })
                })
                .collect::<Result<_, AugmentError>>()?;
            let k = cfg.vote_top.min(batch.len());
            let (winner_ids, outcomes) = architecture_vote(&vote_batch, client, k)?;
            for (mut c, o) in batch.into_iter().zip(outcomes) {
                c.record.stages.push(o);
                if winner_ids.contains(&c.id) {
                    kept.push(c);
                } else {
                    discarded.push(c);
                }
            }
        }
    }

    // Assemble outputs in design-id order.
    let mut graphs = Vec::new();
    let mut records = failed_records;
    kept.sort_by_key(|c| c.id);
    discarded.sort_by_key(|c| c.id);
    for c in &kept {
        let mut g = to_graph_with_classes(&c.flat, &class_names);
        g.name = format!("d{:04}_{}", c.id, c.flat.name);
        graphs.push(g);
    }
    records.extend(kept.into_iter().map(|c| c.record));
    records.extend(discarded.into_iter().map(|c| c.record));
    records.sort_by_key(|r| r.design_id);
    Ok(CurationOutput {
        graphs,
        records,
        class_names,
    })
}
