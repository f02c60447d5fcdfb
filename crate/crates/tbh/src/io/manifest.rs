//! Run manifest: what was run, with which settings, and what it produced.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{file_sha256, write_atomic};
use crate::error::Result;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub stage: String,
    pub index: usize,
    pub label: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<OutputFile>,
    pub failed_cells: Vec<FailedCell>,
    /// Cells reused from checkpoints of an earlier, interrupted run.
    pub resumed_cells: usize,
}

impl RunManifest {
    pub fn new(config: serde_json::Value, seeds: Vec<u64>, workers: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            seeds,
            workers,
            stages: Vec::new(),
            outputs: Vec::new(),
            failed_cells: Vec::new(),
            resumed_cells: 0,
        }
    }

    /// Times `f` as stage `name`.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.stages.push(StageTiming {
            stage: name.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    /// Writes `bytes` to `dir/name` and records its checksum.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.push(OutputFile {
            path: name.into(),
            sha256: file_sha256(&path)?,
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Written last: the manifest's presence marks a finished run.
    pub fn finish(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        write_atomic(&dir.join(FILE_NAME), &json)
    }
}
