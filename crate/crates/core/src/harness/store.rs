//! Run directory layout and the append-only transcript store.

use std::collections::{BTreeMap, HashMap};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::prompt::PromptSetting;
use crate::dataset::{read_jsonl, TaskKind};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const RUNS_DIR: &str = "runs";
pub const SCORES_DIR: &str = "scores";
pub const CACHE_DIR: &str = "cache";
pub const REPORT_FILE: &str = "report.md";

/// One request/response exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub task: TaskKind,
    pub setting: PromptSetting,
    pub template_version: String,
    pub payload_hash: String,
    pub transcript: Option<String>,
    pub error: Option<String>,
    pub latency_ms: u64,
    pub provider: String,
    pub model: String,
    pub cache_hit: bool,
    pub retries: u32,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.transcript.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub instances: usize,
    pub completed: usize,
    pub failed: usize,
    pub cache_hits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub provider: String,
    pub model: String,
    pub settings: Vec<PromptSetting>,
    pub workers: usize,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// Keyed by `<task>.<setting>`.
    pub counts: BTreeMap<String, Counts>,
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    /// An existing run directory with a dataset.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let dir = Self::new(root);
        if !dir.dataset_path().is_file() {
            return Err(Error::Invalid(format!(
                "{} is not a run directory (no {DATASET_FILE})",
                dir.root.display()
            )));
        }
        Ok(dir)
    }

    pub fn create(&self) -> Result<()> {
        for d in [self.root.clone(), self.runs_dir(), self.scores_dir()] {
            std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.root.join(DATASET_FILE)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join(MANIFEST_FILE)
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.root.join(RUNS_DIR)
    }

    pub fn scores_dir(&self) -> PathBuf {
        self.root.join(SCORES_DIR)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.root.join(CACHE_DIR)
    }

    pub fn report_path(&self) -> PathBuf {
        self.root.join(REPORT_FILE)
    }

    pub fn runs_path(&self, task: TaskKind, setting: PromptSetting) -> PathBuf {
        self.runs_dir().join(format!("{task}.{setting}.jsonl"))
    }

    pub fn append(&self, rec: &RunRecord) -> Result<()> {
        let path = self.runs_path(rec.task, rec.setting);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut line = serde_json::to_vec(rec)?;
        line.push(b'\n');
        f.write_all(&line).map_err(|e| Error::io(&path, e))
    }

    /// Latest record per instance id for one (task, setting).
    pub fn latest(
        &self,
        task: TaskKind,
        setting: PromptSetting,
    ) -> Result<HashMap<String, RunRecord>> {
        let path = self.runs_path(task, setting);
        if !path.exists() {
            return Ok(HashMap::new());
        }
        let recs: Vec<RunRecord> = read_jsonl(&path)?;
        Ok(recs
            .into_iter()
            .map(|r| (r.instance_id.clone(), r))
            .collect())
    }

    /// Settings with at least one transcript file, in canonical order.
    pub fn settings_present(&self) -> Result<Vec<PromptSetting>> {
        let mut found = Vec::new();
        for s in PromptSetting::ALL {
            if TaskKind::ALL.iter().any(|t| self.runs_path(*t, s).exists()) {
                found.push(s);
            }
        }
        Ok(found)
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<()> {
        let path = self.manifest_path();
        std::fs::write(&path, serde_json::to_string_pretty(m)? + "\n")
            .map_err(|e| Error::io(&path, e))
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        let path = self.manifest_path();
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
