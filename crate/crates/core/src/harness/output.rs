use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Result, RrpError};

/// Build identifier recorded in manifests.
pub const BUILD_ID: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// A CSV document assembled in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns, "ragged CSV row");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Shortest round-trip formatting, so equal values always print equally.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files of one experiment, held in memory until [`OutputSet::commit`].
#[derive(Debug, Default, Clone)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Appends a manifest listing every file with its SHA-256.
    pub fn add_manifest(&mut self, experiment: &str, config_hash: &str, seeds: &[u64]) {
        let mut m = String::new();
        let _ = writeln!(m, "rrp-manifest 1");
        let _ = writeln!(m, "experiment {experiment}");
        let _ = writeln!(m, "config_sha256 {config_hash}");
        let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(m, "seeds {}", seeds.join(","));
        let _ = writeln!(m, "build {BUILD_ID}");
        for (name, contents) in &self.files {
            let _ = writeln!(m, "file {name} {}", sha256_hex(contents.as_bytes()));
        }
        self.files.push(("manifest.txt".into(), m));
    }

    /// Writes every file into `dir`. On the first failure, files written by
    /// this call are removed again and the error is returned.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| RrpError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                if created_dir {
                    let _ = fs::remove_dir(dir);
                }
                return Err(RrpError::io(&path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[num(1.0), num(0.25)]);
        c.row(&[num(-0.0), num(1e-12)]);
        assert_eq!(c.as_str(), "a,b\n1,0.25\n0,0.000000000001\n");
    }

    #[test]
    fn manifest_lists_hashes() {
        let mut out = OutputSet::new();
        out.add("x.csv", "a\n1\n");
        out.add_manifest("lemma1", "abc", &[0, 1]);
        let m = out.get("manifest.txt").unwrap();
        assert!(m.contains("seeds 0,1"));
        assert!(m.contains(&format!("file x.csv {}", sha256_hex(b"a\n1\n"))));
    }

    #[test]
    fn failed_commit_removes_partial_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::new();
        out.add("ok.csv", "1\n");
        out.add("missing/nested.csv", "2\n");
        assert!(out.commit(dir.path()).is_err());
        assert!(!dir.path().join("ok.csv").exists());
    }
}
