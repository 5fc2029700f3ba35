//! Append-only JSON-lines memory of accepted scenes.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::SceneSignature;
use crate::planner::SemanticCosts;

/// Summary of the accepted trial kept alongside the parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SceneMetrics {
    pub trials: u32,
    pub total_cost: f64,
    pub trigger_distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub signature: SceneSignature,
    pub guidance: Vec<String>,
    pub theta: [f64; 4],
    #[serde(default)]
    pub metrics: SceneMetrics,
    pub ts: DateTime<Utc>,
}

impl MemoryEntry {
    pub fn costs(&self) -> SemanticCosts {
        SemanticCosts::from_array(self.theta)
    }
}

/// Scene memory backed by a JSON-lines file, or held in memory only.
#[derive(Debug, Clone, Default)]
pub struct SceneStore {
    path: Option<PathBuf>,
    volatile: Vec<MemoryEntry>,
}

impl SceneStore {
    pub fn open(path: impl Into<PathBuf>) -> Self {
        Self {
            path: Some(path.into()),
            volatile: Vec::new(),
        }
    }

    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Snapshot of every readable record in file order. Corrupt lines are skipped with a warning.
    pub fn entries(&self) -> io::Result<Vec<MemoryEntry>> {
        let Some(path) = &self.path else {
            return Ok(self.volatile.clone());
        };
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<MemoryEntry>(&line) {
                Ok(entry) if SemanticCosts::from_array(entry.theta).validate().is_ok() => out.push(entry),
                Ok(_) => log::warn!("{}:{}: stored costs violate invariants, skipped", path.display(), n + 1),
                Err(e) => log::warn!("{}:{}: corrupt record skipped: {e}", path.display(), n + 1),
            }
        }
        Ok(out)
    }

    /// Appends one record under an exclusive lock; the file and its parent directory are created on demand.
    pub fn append(&mut self, entry: &MemoryEntry) -> io::Result<()> {
        let Some(path) = &self.path else {
            self.volatile.push(entry.clone());
            return Ok(());
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        file.lock()?;
        let mut line = serde_json::to_string(entry).map_err(io::Error::other)?;
        line.push('\n');
        let written = file.write_all(line.as_bytes()).and_then(|_| file.flush());
        file.unlock()?;
        written
    }
}
