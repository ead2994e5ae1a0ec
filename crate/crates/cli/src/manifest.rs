//! `manifest.json`: what ran, with which inputs, and what it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub wall_seconds: f64,
    /// Peak resident set size in KiB, when the OS reports it.
    pub peak_rss_kib: Option<u64>,
    pub version: String,
}

pub fn sha256_file(path: &Path) -> Result<Artifact> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    let digest = Sha256::digest(&bytes);
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(Artifact {
        path: path.to_path_buf(),
        sha256,
        bytes: bytes.len() as u64,
    })
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

/// Collects run facts and writes the manifest last.
pub struct Recorder {
    command: String,
    seed: u64,
    config: serde_json::Value,
    started: Instant,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Recorder {
    pub fn start(command: &str, seed: u64, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            seed,
            config: serde_json::to_value(config)?,
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.inputs.push(path.into());
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    pub fn finish(self, out_dir: &Path) -> Result<PathBuf> {
        let hash_all = |paths: &[PathBuf]| paths.iter().map(|p| sha256_file(p)).collect::<Result<Vec<_>>>();
        let manifest = RunManifest {
            command: self.command,
            args: std::env::args().skip(1).collect(),
            config: self.config,
            seed: self.seed,
            inputs: hash_all(&self.inputs)?,
            outputs: hash_all(&self.outputs)?,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            peak_rss_kib: peak_rss_kib(),
            version: env!("CARGO_PKG_VERSION").into(),
        };
        let path = out_dir.join(MANIFEST_NAME);
        write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        Ok(path)
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .context("output path has no file name")?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}
