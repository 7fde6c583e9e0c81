//! Per-invocation state: input fingerprints, artifact writing, manifests
//! and exit-code classification.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Bad invocation or configuration; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<movoc::Error>() {
            match e {
                movoc::Error::Config(_) | movoc::Error::Argument(_) => return 2,
                movoc::Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => return 2,
                _ => {}
            }
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return 2;
            }
        }
    }
    1
}

/// Written next to every artifact as `<artifact>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, A: Serialize> {
    pub command: &'a str,
    pub arguments: &'a A,
    /// sha256 of each input file's bytes, keyed by path.
    pub inputs: &'a BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub toolkit_version: &'static str,
    pub duration_ms: u128,
}

pub struct Run {
    started: Instant,
    inputs: BTreeMap<String, String>,
    outputs: Vec<(PathBuf, Vec<u8>)>,
}

impl Run {
    pub fn new() -> Self {
        Run {
            started: Instant::now(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    /// Reads and fingerprints a file, or stdin when `path` is `None` or `-`.
    pub fn read(&mut self, path: Option<&Path>) -> Result<Vec<u8>> {
        match path.filter(|p| p.as_os_str() != "-") {
            Some(p) => {
                let bytes =
                    std::fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
                self.inputs
                    .insert(p.display().to_string(), hex::encode(Sha256::digest(&bytes)));
                Ok(bytes)
            }
            None => {
                let mut bytes = Vec::new();
                std::io::stdin()
                    .read_to_end(&mut bytes)
                    .context("cannot read stdin")?;
                Ok(bytes)
            }
        }
    }

    pub fn read_text(&mut self, path: Option<&Path>) -> Result<String> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).map_err(|e| {
            let valid = e.utf8_error().valid_up_to();
            let line = e.as_bytes()[..valid]
                .iter()
                .filter(|&&b| b == b'\n')
                .count()
                + 1;
            let name = path.map_or("stdin".to_string(), |p| p.display().to_string());
            anyhow::Error::new(movoc::Error::Decode { line })
                .context(format!("cannot decode {name}"))
        })
    }

    /// Queues an artifact; nothing touches the disk until [`Run::finish`].
    pub fn output(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.outputs.push((path, bytes));
    }

    /// Writes queued artifacts, or `stdout_text` to stdout when there are
    /// none, then one manifest next to the first artifact.
    pub fn finish<A: Serialize>(
        self,
        command: &str,
        arguments: &A,
        stdout_text: Option<&[u8]>,
    ) -> Result<()> {
        if self.outputs.is_empty() {
            if let Some(text) = stdout_text {
                let mut out = std::io::stdout().lock();
                out.write_all(text)?;
                out.flush()?;
            }
            return Ok(());
        }
        for (path, bytes) in &self.outputs {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
            }
            std::fs::write(path, bytes)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        let manifest = RunManifest {
            command,
            arguments,
            inputs: &self.inputs,
            outputs: self
                .outputs
                .iter()
                .map(|(p, _)| p.display().to_string())
                .collect(),
            toolkit_version: movoc::VERSION,
            duration_ms: self.started.elapsed().as_millis(),
        };
        let path = manifest_path(&self.outputs[0].0);
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        std::fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}
