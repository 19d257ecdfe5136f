//! Generator client contract: the stand-in for an external code generator.
//! Implementations must be pure with respect to curation state; the stub is
//! fully deterministic given its seed.

use serde::{Deserialize, Serialize};

use crate::model::cosine_similarity;
use crate::netlist::{write_netlist, LintReport};

use super::generators::synth_generate;
use super::{AugmentError, DesignSpec};

/// One design offered to the architecture vote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VoteCandidate {
    pub id: usize,
    pub source: String,
    /// Structural embedding (not sent to external clients; the stub scores
    /// with it).
    #[serde(skip)]
    pub embedding: Vec<f64>,
    pub gate_count: usize,
}

pub trait GeneratorClient {
    /// Produces `n` candidate netlist source texts for the spec.
    fn generate(
        &self,
        spec: &DesignSpec,
        n: usize,
        temperature: f64,
    ) -> Result<Vec<String>, AugmentError>;

    /// Scores a batch of designs; higher is better.
    fn evaluate(&self, batch: &[VoteCandidate]) -> Result<Vec<f64>, AugmentError>;

    /// Proposes a revised source given lint diagnostics.
    fn debug(&self, source: &str, report: &LintReport) -> Result<String, AugmentError>;
}

/// Deterministic built-in client: generation delegates to the architecture
/// generators, scoring uses a fixed diversity/complexity blend, and the
/// debug step performs one mechanical fix per call.
#[derive(Debug, Clone, Default)]
pub struct StubClient {
    pub seed: u64,
}

impl StubClient {
    pub fn new(seed: u64) -> StubClient {
        StubClient { seed }
    }
}

impl GeneratorClient for StubClient {
    fn generate(
        &self,
        spec: &DesignSpec,
        n: usize,
        _temperature: f64,
    ) -> Result<Vec<String>, AugmentError> {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            // Rotate through the supported architectures unless pinned.
            let design = synth_generate(spec, self.seed.wrapping_add(i as u64))?;
            out.push(write_netlist(&design.netlist));
        }
        Ok(out)
    }

    fn evaluate(&self, batch: &[VoteCandidate]) -> Result<Vec<f64>, AugmentError> {
        // score = 0.7 * mean pairwise (1 - cosine similarity) + 0.3 *
        // (gate count / batch max gate count)
        let max_gates = batch.iter().map(|c| c.gate_count).max().unwrap_or(1).max(1);
        let mut scores = Vec::with_capacity(batch.len());
        for (i, c) in batch.iter().enumerate() {
            let mut div = 0.0;
            let mut others = 0.0;
            for (j, o) in batch.iter().enumerate() {
                if i == j {
                    continue;
                }
                div += 1.0 - cosine_similarity(&c.embedding, &o.embedding)?;
                others += 1.0;
            }
            let diversity = if others > 0.0 { div / others } else { 0.0 };
            let complexity = c.gate_count as f64 / max_gates as f64;
            scores.push(0.7 * diversity + 0.3 * complexity);
        }
        Ok(scores)
    }

    fn debug(&self, source: &str, report: &LintReport) -> Result<String, AugmentError> {
        // Fix one UNDECLARED_NET per call by inserting the missing wire
        // declaration after the module header. Other defects are left for
        // smarter clients; returning the source unchanged lets the repair
        // loop detect non-convergence.
        let missing = report
            .errors()
            .find(|d| d.code == crate::netlist::LintCode::UndeclaredNet)
            .and_then(|d| {
                let msg = &d.message;
                let start = msg.find('`')? + 1;
                let end = msg[start..].find('`')? + start;
                Some(msg[start..end].to_string())
            });
        match missing {
            Some(net) if !net.contains('.') => {
                let header_end = source
                    .find(';')
                    .map(|i| i + 1)
                    .unwrap_or(0);
                let mut fixed = String::with_capacity(source.len() + net.len() + 8);
                fixed.push_str(&source[..header_end]);
                fixed.push_str(&format!("\nwire {net};"));
                fixed.push_str(&source[header_end..]);
                Ok(fixed)
            }
            _ => Ok(source.to_string()),
        }
    }
}

/// External client speaking newline-delimited JSON over a subprocess's
/// standard streams. One request document in, one response document out.
#[derive(Debug, Clone)]
pub struct CmdClient {
    pub command: Vec<String>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Request<'a> {
    Generate {
        op: &'static str,
        spec: &'a DesignSpec,
        n: usize,
        temperature: f64,
    },
    Evaluate {
        op: &'static str,
        designs: Vec<DesignDoc<'a>>,
    },
    Debug {
        op: &'static str,
        source: &'a str,
        diagnostics: Vec<String>,
    },
}

#[derive(Serialize)]
struct DesignDoc<'a> {
    id: usize,
    source: &'a str,
    gate_count: usize,
}

#[derive(Deserialize)]
struct Response {
    sources: Option<Vec<String>>,
    scores: Option<Vec<f64>>,
    source: Option<String>,
}

impl CmdClient {
    pub fn new(command: &str) -> Result<CmdClient, AugmentError> {
        let parts: Vec<String> = command.split_whitespace().map(|s| s.to_string()).collect();
        if parts.is_empty() {
            return Err(AugmentError::Config("empty client command".into()));
        }
        Ok(CmdClient { command: parts })
    }

    fn round_trip(&self, request: &Request) -> Result<Response, AugmentError> {
        use std::io::Write;
        use std::process::{Command, Stdio};
        let payload = serde_json::to_string(request)
            .map_err(|e| AugmentError::EvaluatorFailure(e.to_string()))?;
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| AugmentError::EvaluatorFailure(format!("spawn: {e}")))?;
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(payload.as_bytes())
            .map_err(|e| AugmentError::EvaluatorFailure(format!("write: {e}")))?;
        let out = child
            .wait_with_output()
            .map_err(|e| AugmentError::EvaluatorFailure(format!("wait: {e}")))?;
        if !out.status.success() {
            return Err(AugmentError::EvaluatorFailure(format!(
                "client exited with {}",
                out.status
            )));
        }
        serde_json::from_slice(&out.stdout)
            .map_err(|e| AugmentError::EvaluatorFailure(format!("bad response: {e}")))
    }
}

impl GeneratorClient for CmdClient {
    fn generate(
        &self,
        spec: &DesignSpec,
        n: usize,
        temperature: f64,
    ) -> Result<Vec<String>, AugmentError> {
        let resp = self.round_trip(&Request::Generate {
            op: "generate",
            spec,
            n,
            temperature,
        })?;
        resp.sources
            .ok_or_else(|| AugmentError::EvaluatorFailure("missing `sources`".into()))
    }

    fn evaluate(&self, batch: &[VoteCandidate]) -> Result<Vec<f64>, AugmentError> {
        let resp = self.round_trip(&Request::Evaluate {
            op: "evaluate",
            designs: batch
                .iter()
                .map(|c| DesignDoc {
                    id: c.id,
                    source: &c.source,
                    gate_count: c.gate_count,
                })
                .collect(),
        })?;
        resp.scores
            .ok_or_else(|| AugmentError::EvaluatorFailure("missing `scores`".into()))
    }

    fn debug(&self, source: &str, report: &LintReport) -> Result<String, AugmentError> {
        let resp = self.round_trip(&Request::Debug {
            op: "debug",
            source,
            diagnostics: report.rendered(),
        })?;
        resp.source
            .ok_or_else(|| AugmentError::EvaluatorFailure("missing `source`".into()))
    }
}

/// External client speaking the same JSON documents over HTTP POST.
#[derive(Debug, Clone)]
pub struct HttpClient {
    pub endpoint: String,
    pub timeout: std::time::Duration,
}

impl HttpClient {
    pub fn new(endpoint: &str) -> HttpClient {
        HttpClient {
            endpoint: endpoint.to_string(),
            timeout: std::time::Duration::from_secs(60),
        }
    }

    fn round_trip(&self, request: &Request) -> Result<Response, AugmentError> {
        let payload = serde_json::to_string(request)
            .map_err(|e| AugmentError::EvaluatorFailure(e.to_string()))?;
        let resp = ureq::post(&self.endpoint)
            .timeout(self.timeout)
            .set("content-type", "application/json")
            .send_string(&payload)
            .map_err(|e| AugmentError::EvaluatorFailure(format!("http: {e}")))?;
        let body = resp
            .into_string()
            .map_err(|e| AugmentError::EvaluatorFailure(format!("read: {e}")))?;
        serde_json::from_str(&body)
            .map_err(|e| AugmentError::EvaluatorFailure(format!("bad response: {e}")))
    }
}

impl GeneratorClient for HttpClient {
    fn generate(
        &self,
        spec: &DesignSpec,
        n: usize,
        temperature: f64,
    ) -> Result<Vec<String>, AugmentError> {
        let resp = self.round_trip(&Request::Generate {
            op: "generate",
            spec,
            n,
            temperature,
        })?;
        resp.sources
            .ok_or_else(|| AugmentError::EvaluatorFailure("missing `sources`".into()))
    }

    fn evaluate(&self, batch: &[VoteCandidate]) -> Result<Vec<f64>, AugmentError> {
        let resp = self.round_trip(&Request::Evaluate {
            op: "evaluate",
            designs: batch
                .iter()
                .map(|c| DesignDoc {
                    id: c.id,
                    source: &c.source,
                    gate_count: c.gate_count,
                })
                .collect(),
        })?;
        resp.scores
            .ok_or_else(|| AugmentError::EvaluatorFailure("missing `scores`".into()))
    }

    fn debug(&self, source: &str, report: &LintReport) -> Result<String, AugmentError> {
        let resp = self.round_trip(&Request::Debug {
            op: "debug",
            source,
            diagnostics: report.rendered(),
        })?;
        resp.source
            .ok_or_else(|| AugmentError::EvaluatorFailure("missing `source`".into()))
    }
}
