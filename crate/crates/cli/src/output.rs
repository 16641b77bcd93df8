//! Output directory handling: lock file, tracked writes and the run manifest.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dcnet::experiments::{write_pgm, GridStack, Table};
use dcnet::learn::{save_checkpoint, CheckpointMeta, Network};
use dcnet::Image;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const LOCK_FILE: &str = ".lock";

/// Record of one successful command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub experiment: String,
    pub config: String,
    pub version: String,
    pub wall_clock_seconds: f64,
    /// SHA-256 of every file the command wrote, keyed by path relative to the output directory.
    pub checksums: BTreeMap<String, String>,
    pub metrics: serde_json::Value,
}

pub fn manifest_name(command: &str) -> String {
    format!("manifest_{command}.json")
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Exclusive hold on an output directory, released on drop.
#[derive(Debug)]
struct Lock {
    path: PathBuf,
}

impl Lock {
    fn acquire(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::config(format!(
                "{} is locked by another run (remove {} if that run is gone)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// The output directory of one command.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    command: String,
    written: Vec<String>,
    started: Instant,
    _lock: Lock,
}

impl OutputDir {
    /// Creates the directory, takes the lock and removes this command's stale manifest.
    pub fn open(root: &Path, command: &str) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", root.display())))?;
        let lock = Lock::acquire(root)?;
        let stale = root.join(manifest_name(command));
        if stale.exists() {
            fs::remove_file(&stale)?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            command: command.to_string(),
            written: Vec::new(),
            started: Instant::now(),
            _lock: lock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Fails with a config error when an input of an earlier stage is missing.
    pub fn require(&self, rel: &str) -> Result<PathBuf, CliError> {
        let p = self.path(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(CliError::config(format!(
                "missing {}; run the earlier stage first",
                p.display()
            )))
        }
    }

    fn target(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let p = self.path(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(rel.to_string());
        Ok(p)
    }

    pub fn table(&mut self, rel: &str, t: &Table) -> Result<(), CliError> {
        let p = self.target(rel)?;
        Ok(t.write(&p)?)
    }

    pub fn stack(&mut self, rel: &str, s: &GridStack<f64>) -> Result<(), CliError> {
        let p = self.target(rel)?;
        Ok(s.save(&p)?)
    }

    pub fn pgm(&mut self, rel: &str, img: &Image<f64>, peak: f64) -> Result<(), CliError> {
        let p = self.target(rel)?;
        Ok(write_pgm(&p, img, peak)?)
    }

    pub fn checkpoint(&mut self, rel: &str, net: &Network<f64>, meta: &CheckpointMeta) -> Result<(), CliError> {
        let p = self.target(rel)?;
        Ok(save_checkpoint(&p, net, meta)?)
    }

    /// Checksums everything written and stores the manifest (write to a temporary, then rename).
    pub fn finish(self, cfg: &ExperimentConfig, metrics: serde_json::Value) -> Result<RunManifest, CliError> {
        let mut checksums = BTreeMap::new();
        for rel in &self.written {
            checksums.insert(rel.clone(), sha256_file(&self.path(rel))?);
        }
        let manifest = RunManifest {
            command: self.command.clone(),
            experiment: cfg.experiment.to_string(),
            config: cfg.serialize(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            checksums,
            metrics,
        };
        let name = manifest_name(&self.command);
        let tmp = self.path(&format!("{name}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path(&name))?;
        Ok(manifest)
    }
}
