//! Run directories and the `run.json` manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const MANIFEST: &str = "run.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Resolved configuration, after defaults and command-line overrides.
    pub config: Value,
    /// Command-specific metrics, with wall times in seconds.
    pub metrics: Value,
    /// Files written in the run directory, relative to it.
    pub outputs: Vec<String>,
    pub exit_status: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Value of `MAXAREA_THREADS`, if set. The solver itself runs on one thread.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub wall_time_s: f64,
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))
}

/// A fresh directory `<out>/<command>-<UTC timestamp>-<random hex>` and the files written to it.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(out: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
        let mut rng = rand::thread_rng();
        loop {
            let path = out.join(format!("{command}-{stamp}-{:06x}", rng.gen_range(0..1u32 << 24)));
            match fs::create_dir(&path) {
                Ok(()) => return Ok(RunDir { path, outputs: Vec::new() }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e).with_context(|| format!("creating {}", path.display())),
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path.join(name);
        write_atomic(&path, contents.as_ref())?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.into());
        }
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn finish(&self, manifest: &RunManifest) -> Result<PathBuf> {
        let path = self.path.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(manifest)?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}
