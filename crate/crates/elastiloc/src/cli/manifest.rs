//! Per-run manifest and output tracking.
//!
//! Every successful command writes `manifest_<command>.txt` into the output
//! directory: the effective configuration, each input path with a content
//! hash, and each output (relative to the output directory) with its hash.
//! On failure every file the run created is removed, so a directory never
//! holds partial results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// FNV-1a 64-bit content hash, hex-encoded.
pub fn fnv64_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(fnv64_hex(&bytes))
}

/// Tracks one command's outputs; call [`Run::finish`] on success, drop on
/// failure to clean up.
pub struct Run {
    command: &'static str,
    out_dir: PathBuf,
    config_dump: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    committed: bool,
}

impl Run {
    pub fn new(command: &'static str, out_dir: &Path, config_dump: String) -> Result<Run> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        Ok(Run {
            command,
            out_dir: out_dir.to_path_buf(),
            config_dump,
            inputs: Vec::new(),
            outputs: Vec::new(),
            committed: false,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn add_input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    /// Register an output path inside the run directory.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let p = self.out_dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    /// Write the manifest and mark the run as kept.
    pub fn finish(mut self) -> Result<PathBuf> {
        let mut m = String::from("elastiloc-manifest-v1\n");
        let _ = writeln!(m, "command = {}", self.command);
        m.push_str(&self.config_dump);
        for p in &self.inputs {
            let _ = writeln!(m, "input {} fnv64:{}", p.display(), hash_file(p)?);
        }
        for p in &self.outputs {
            let rel = p.strip_prefix(&self.out_dir).unwrap_or(p);
            let _ = writeln!(m, "output {} fnv64:{}", rel.display(), hash_file(p)?);
        }
        let path = self.out_dir.join(format!("manifest_{}.txt", self.command));
        std::fs::write(&path, m).map_err(|e| Error::io(&path, e))?;
        self.committed = true;
        Ok(path)
    }
}

impl Drop for Run {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.outputs {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}
