//! Shared helpers: config parsing, client construction, and bounded
//! parallel mapping for per-design work.

use std::path::Path;

use netlearn::augment::{CmdClient, GeneratorClient, HttpClient, StubClient};
use netlearn::model::{Optimizer, TrainConfig};
use netlearn::netlist::{CellLibrary, LabelMap};
use netlearn::sampler::SamplerConfig;

use crate::error::{read_file, CliError};

/// Environment variable that overrides the configured client selection.
pub const CLIENT_ENV: &str = "NETLEARN_CLIENT";

/// Builds a generator client from a selector: `stub`, `cmd:<command>`, or
/// `http:<endpoint>`. The `NETLEARN_CLIENT` environment variable, when set,
/// takes precedence over `selector`.
pub fn make_client(selector: &str, seed: u64) -> Result<Box<dyn GeneratorClient>, CliError> {
    let chosen = std::env::var(CLIENT_ENV).unwrap_or_else(|_| selector.to_string());
    if chosen == "stub" {
        Ok(Box::new(StubClient::new(seed)))
    } else if let Some(cmd) = chosen.strip_prefix("cmd:") {
        Ok(Box::new(CmdClient::new(cmd)?))
    } else if let Some(endpoint) = chosen.strip_prefix("http:") {
        Ok(Box::new(HttpClient::new(endpoint)))
    } else {
        Err(CliError::user(format!(
            "unknown client `{chosen}` (expected stub, cmd:<command>, or http:<endpoint>)"
        )))
    }
}

pub fn load_library(path: Option<&Path>) -> Result<CellLibrary, CliError> {
    match path {
        Some(p) => Ok(CellLibrary::parse(&read_file(p)?)?),
        None => Ok(CellLibrary::new()),
    }
}

pub fn load_labelmap(path: Option<&Path>) -> Result<LabelMap, CliError> {
    match path {
        Some(p) => Ok(LabelMap::parse(&read_file(p)?)?),
        None => Ok(LabelMap::default()),
    }
}

/// Training knobs in the same key=value format as curation configs.
/// Unknown keys are rejected. Keys: `learning_rate`, `epochs`, `layers`,
/// `hidden`, `optimizer` (sgd|momentum), `subgraphs_per_graph`, `loss_norm`,
/// `seed`, and the sampler's `roots`, `walk_length`, `rounds`.
pub fn parse_train_config(text: &str) -> Result<(TrainConfig, SamplerConfig), CliError> {
    let mut tc = TrainConfig::default();
    let mut sc = SamplerConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::user(format!("train config line {}: expected key=value", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| {
            CliError::user(format!(
                "train config line {}: bad {what} `{value}`",
                lineno + 1
            ))
        };
        match key {
            "learning_rate" => tc.learning_rate = value.parse().map_err(|_| bad("number"))?,
            "epochs" => tc.epochs = value.parse().map_err(|_| bad("count"))?,
            "layers" => tc.layers = value.parse().map_err(|_| bad("count"))?,
            "hidden" => tc.hidden = value.parse().map_err(|_| bad("count"))?,
            "subgraphs_per_graph" => {
                tc.subgraphs_per_graph = value.parse().map_err(|_| bad("count"))?
            }
            "seed" => tc.seed = value.parse().map_err(|_| bad("seed"))?,
            "loss_norm" => tc.loss_norm = value.parse().map_err(|_| bad("boolean"))?,
            "optimizer" => {
                tc.optimizer = match value {
                    "sgd" => Optimizer::Sgd,
                    "momentum" => Optimizer::Momentum,
                    _ => return Err(bad("optimizer")),
                }
            }
            "roots" => sc.roots = value.parse().map_err(|_| bad("count"))?,
            "walk_length" => sc.walk_length = value.parse().map_err(|_| bad("count"))?,
            "rounds" => sc.rounds = value.parse().map_err(|_| bad("count"))?,
            _ => {
                return Err(CliError::user(format!(
                    "train config line {}: unknown key `{key}`",
                    lineno + 1
                )))
            }
        }
    }
    sc.seed = tc.seed;
    Ok((tc, sc))
}

/// Applies `f` to every item on up to `jobs` threads, preserving input
/// order in the output. `jobs <= 1` runs inline.
pub fn par_map<T, U, F>(items: Vec<T>, jobs: usize, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let mut slots: Vec<Option<U>> = items.iter().map(|_| None).collect();
    let mut work: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    let chunk = work.len().div_ceil(jobs);
    let mut batches: Vec<Vec<(usize, T)>> = Vec::new();
    while !work.is_empty() {
        let take = chunk.min(work.len());
        batches.push(work.drain(..take).collect());
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = batches
            .into_iter()
            .map(|batch| {
                let f = &f;
                scope.spawn(move || batch.into_iter().map(|(i, t)| (i, f(t))).collect::<Vec<_>>())
            })
            .collect();
        for handle in handles {
            for (i, u) in handle.join().expect("worker panicked") {
                slots[i] = Some(u);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}
