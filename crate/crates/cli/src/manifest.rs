//! Run bookkeeping: hashed inputs and outputs, the normalized config, and
//! removal of partial outputs when a subcommand fails.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    seeds: &'a BTreeMap<String, u64>,
    config: &'a Value,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
    details: &'a Value,
}

/// Outputs of one subcommand under `root`. Files registered with
/// [`Run::output`] are deleted on drop unless [`Run::finish`] ran.
pub struct Run {
    subcommand: String,
    root: PathBuf,
    manifest: PathBuf,
    config: Value,
    seeds: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
    created_dirs: Vec<PathBuf>,
    pub details: Value,
    finished: bool,
}

impl Run {
    /// `manifest` is where the manifest goes; output paths are reported
    /// relative to `root`.
    pub fn new(subcommand: &str, root: &Path, manifest: PathBuf, config: Value) -> Result<Self> {
        let mut run = Run {
            subcommand: subcommand.to_string(),
            root: root.to_path_buf(),
            manifest: PathBuf::new(),
            config,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            created_dirs: Vec::new(),
            details: Value::Object(Default::default()),
            finished: false,
        };
        run.mkdirs(root)?;
        run.manifest = run.output(&manifest)?;
        Ok(run)
    }

    fn mkdirs(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut d = Some(dir);
        while let Some(p) = d {
            if p.as_os_str().is_empty() || p.exists() {
                break;
            }
            missing.push(p.to_path_buf());
            d = p.parent();
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        self.created_dirs.extend(missing.into_iter().rev());
        Ok(())
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Register an output path (absolute, or relative to the root) and make
    /// sure its directory exists.
    pub fn output(&mut self, path: &Path) -> Result<PathBuf> {
        let full = if path.is_absolute() { path.to_path_buf() } else { self.root.join(path) };
        if let Some(parent) = full.parent() {
            self.mkdirs(parent)?;
        }
        if !self.outputs.contains(&full) {
            self.outputs.push(full.clone());
        }
        Ok(full)
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<PathBuf> {
        let full = self.output(path)?;
        fs::write(&full, bytes).with_context(|| format!("writing {}", full.display()))?;
        Ok(full)
    }

    fn relative(&self, p: &Path) -> String {
        p.strip_prefix(&self.root).unwrap_or(p).display().to_string()
    }

    /// Hash every output and write the manifest.
    pub fn finish(mut self) -> Result<PathBuf> {
        let mut outputs = BTreeMap::new();
        for p in &self.outputs {
            if *p == self.manifest {
                continue;
            }
            if !p.exists() {
                anyhow::bail!("declared output {} was not written", p.display());
            }
            outputs.insert(self.relative(p), sha256_file(p)?);
        }
        let m = ManifestFile {
            tool: "bargain",
            version: VERSION,
            subcommand: &self.subcommand,
            seeds: &self.seeds,
            config: &self.config,
            inputs: &self.inputs,
            outputs: &outputs,
            details: &self.details,
        };
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        fs::write(&self.manifest, text).with_context(|| format!("writing {}", self.manifest.display()))?;
        self.finished = true;
        Ok(self.manifest.clone())
    }
}

impl Drop for Run {
    fn drop(&mut self) {
        if self.finished {
            return;
        }
        for p in &self.outputs {
            let _ = fs::remove_file(p);
        }
        // Only directories this run created, deepest first, and only if empty.
        for d in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfinished_run_cleans_up() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().join("out");
        {
            let mut run = Run::new("t", &root, "manifests/t.json".into(), Value::Null).unwrap();
            run.write(Path::new("a/b.txt"), b"partial").unwrap();
            assert!(root.join("a/b.txt").exists());
        }
        assert!(!root.exists());
    }

    #[test]
    fn finished_run_hashes_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let mut run = Run::new("t", tmp.path(), "m.json".into(), Value::Null).unwrap();
        run.write(Path::new("x.txt"), b"abc").unwrap();
        let m = run.finish().unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(
            v["outputs"]["x.txt"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert!(tmp.path().join("x.txt").exists());
    }
}
