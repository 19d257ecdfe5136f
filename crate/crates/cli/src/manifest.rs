//! Run manifests: every artifact-producing command writes exactly one
//! manifest beside its output describing how to regenerate it.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// The subcommand that produced the output.
    pub command: String,
    /// Verbatim snapshot of the config file, when one was used.
    pub config: Option<String>,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
    /// The only non-deterministic field; reruns differ here and nowhere else.
    pub wall_time_ms: u128,
}

/// Tracks a command run and serializes its manifest.
pub struct ManifestBuilder {
    manifest: RunManifest,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64) -> ManifestBuilder {
        ManifestBuilder {
            manifest: RunManifest {
                command: command.to_string(),
                config: None,
                seed,
                inputs: Vec::new(),
                outputs: Vec::new(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms: 0,
            },
            started: Instant::now(),
        }
    }

    pub fn config(&mut self, snapshot: &str) -> &mut Self {
        self.manifest.config = Some(snapshot.to_string());
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.manifest.inputs.push(path.display().to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.manifest.outputs.push(path.display().to_string());
        self
    }

    /// Writes the manifest to `path`, stamping the elapsed wall time.
    pub fn write(mut self, path: &Path) -> Result<(), CliError> {
        self.manifest.wall_time_ms = self.started.elapsed().as_millis();
        let mut text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::internal(format!("manifest serialization: {e}")))?;
        text.push('\n');
        crate::error::write_file(path, &text)
    }
}

/// Manifest path beside a file output: `dataset.txt` -> `dataset.manifest.json`.
pub fn sibling_manifest(out: &Path) -> std::path::PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    out.with_file_name(format!("{stem}.manifest.json"))
}
