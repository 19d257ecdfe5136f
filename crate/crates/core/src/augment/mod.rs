//! Data-augmentation curation: design generation, corruption and decoy
//! construction, cell-count and structural-similarity filtering,
//! architecture voting, composition, and the end-to-end curation pipeline.

mod client;
mod compose;
mod corrupt;
mod curate;
mod filters;
mod generators;
mod repair;

pub use client::{CmdClient, GeneratorClient, HttpClient, StubClient, VoteCandidate};
pub use compose::{compose_flat_design, ComposedDesign};
pub use corrupt::{corrupt, corrupt_flat, random_netlist, rewire_decoy};
pub use curate::{curate, CurationConfig, CurationOutput, SpecEntry};
pub use filters::{
    architecture_vote, cell_count_filter, similarity, similarity_filter, structural_embedding,
    SimilarityConfig,
};
pub use generators::{
    resolve_architecture, supported_architectures, synth_generate, GeneratedDesign, ARCHITECTURES,
};
pub use repair::{default_top, repair_loop};

use serde::{Deserialize, Serialize};

use crate::netlist::LintReport;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("unsupported class `{0}`")]
    UnsupportedClass(String),
    #[error("unsupported architecture `{1}` for class `{0}`")]
    UnsupportedArchitecture(String, String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("corruption rate must lie in (0, 1]")]
    InvalidRate,
    #[error("netlist error: {0}")]
    Netlist(#[from] crate::netlist::NetlistError),
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
    #[error("repair exhausted after {iterations} iterations; last report:\n{report}")]
    RepairExhausted {
        iterations: usize,
        report: LintReport,
    },
    #[error("evaluator failure: {0}")]
    EvaluatorFailure(String),
    #[error("no golden reference for class `{0}`")]
    NoGoldenReference(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A functional specification to generate designs for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub class: String,
    pub width: u32,
    /// Architecture hint; `None` lets the generator choose.
    pub architecture: Option<String>,
    pub description: String,
}

impl DesignSpec {
    pub fn new(class: &str, width: u32, architecture: Option<&str>) -> DesignSpec {
        DesignSpec {
            class: class.to_string(),
            width,
            architecture: architecture.map(|s| s.to_string()),
            description: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.class.is_empty() {
            return Err(AugmentError::InvalidSpec("class name is empty".into()));
        }
        if !(2..=64).contains(&self.width) {
            return Err(AugmentError::InvalidSpec(format!(
                "width {} outside [2, 64]",
                self.width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    LintRepair,
    CellCount,
    Similarity,
    Vote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Kept,
    Discarded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: Stage,
    pub verdict: Verdict,
    pub score: Option<f64>,
    pub reason: String,
}

/// Provenance of one candidate through the curation stages. A discarded
/// design records no stages after the one that discarded it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationRecord {
    pub design_id: usize,
    pub spec: DesignSpec,
    pub stages: Vec<StageOutcome>,
}

impl CurationRecord {
    pub fn kept(&self) -> bool {
        self.stages.iter().all(|s| s.verdict == Verdict::Kept)
    }
}

#[cfg(test)]
mod tests;
