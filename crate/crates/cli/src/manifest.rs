//! Run manifest: configuration echo, per-stage wall times and convergence
//! diagnostics, and a checksum for every emitted file.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Serialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub command: String,
    pub config: crate::config::FileConfig,
    pub stages: Vec<Stage>,
    pub outputs: Vec<OutputFile>,
}

#[derive(Serialize)]
pub struct Stage {
    pub name: String,
    pub wall_time_s: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

#[derive(Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

pub struct ManifestBuilder {
    manifest: Manifest,
    stage_started: Option<(String, Instant)>,
    diagnostics: BTreeMap<String, f64>,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: crate::config::FileConfig) -> Self {
        Self {
            manifest: Manifest {
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config,
                stages: Vec::new(),
                outputs: Vec::new(),
            },
            stage_started: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn begin_stage(&mut self, name: impl Into<String>) {
        self.finish_stage();
        self.stage_started = Some((name.into(), Instant::now()));
        self.diagnostics = BTreeMap::new();
    }

    pub fn record(&mut self, key: impl Into<String>, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    pub fn finish_stage(&mut self) {
        if let Some((name, started)) = self.stage_started.take() {
            self.manifest.stages.push(Stage {
                name,
                wall_time_s: started.elapsed().as_secs_f64(),
                diagnostics: std::mem::take(&mut self.diagnostics),
            });
        }
    }

    /// Write a file and register its checksum.
    pub fn emit(&mut self, path: &Path, contents: &[u8]) -> anyhow::Result<()> {
        std::fs::write(path, contents)?;
        let mut hasher = Sha256::new();
        hasher.update(contents);
        self.manifest.outputs.push(OutputFile {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    /// Close the manifest and write it next to the outputs.
    pub fn write(mut self, dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
        self.finish_stage();
        let path = dir.join(name);
        let json = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&path, json)?;
        Ok(path)
    }
}
