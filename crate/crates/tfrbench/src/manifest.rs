//! Dataset manifests: CSV with header `path,label,fold`.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// As written in the manifest.
    pub path: String,
    /// Class label in `[0, C)`.
    pub label: usize,
    /// Fold id in `[1, K]`.
    pub fold: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    /// Directory relative paths are resolved against.
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct Row {
    path: String,
    label: String,
    fold: String,
}

impl Manifest {
    /// Reads and validates a manifest; relative audio paths are resolved
    /// against the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, root).map_err(|message| Error::Manifest {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses manifest CSV bytes (LF or CRLF line endings).
    pub fn parse(bytes: &[u8], root: PathBuf) -> std::result::Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        for column in ["path", "label", "fold"] {
            if !headers.iter().any(|h| h == column) {
                return Err(format!("missing column `{column}`"));
            }
        }
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| format!("line {line}: {e}"))?;
            let label = row
                .label
                .parse::<usize>()
                .map_err(|_| format!("line {line}: label `{}` is not a nonnegative integer", row.label))?;
            let fold = row
                .fold
                .parse::<usize>()
                .map_err(|_| format!("line {line}: fold `{}` is not a nonnegative integer", row.fold))?;
            if fold == 0 {
                return Err(format!("line {line}: folds are numbered from 1"));
            }
            if row.path.is_empty() {
                return Err(format!("line {line}: empty path"));
            }
            if !seen.insert(row.path.clone()) {
                return Err(format!("line {line}: duplicate path `{}`", row.path));
            }
            entries.push(ManifestEntry {
                path: row.path,
                label,
                fold,
            });
        }
        Ok(Self { root, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `1 + max label`, or 0 when empty.
    pub fn n_classes(&self) -> usize {
        self.entries.iter().map(|e| e.label + 1).max().unwrap_or(0)
    }

    /// Highest fold id, or 0 when empty.
    pub fn n_folds(&self) -> usize {
        self.entries.iter().map(|e| e.fold).max().unwrap_or(0)
    }

    /// Entry count per fold id.
    pub fn fold_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.fold).or_insert(0) += 1;
        }
        counts
    }

    /// Checks folds lie in `[1, k]` and every fold is populated.
    pub fn validate_folds(&self, k: usize) -> Result<()> {
        if let Some(e) = self.entries.iter().find(|e| e.fold > k) {
            return Err(Error::Config(format!(
                "`{}` is in fold {} but only {k} folds were requested",
                e.path, e.fold
            )));
        }
        let counts = self.fold_counts();
        if let Some(f) = (1..=k).find(|f| !counts.contains_key(f)) {
            return Err(Error::Config(format!("fold {f} has no entries")));
        }
        Ok(())
    }

    /// Filesystem location of an entry's audio.
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }
}
