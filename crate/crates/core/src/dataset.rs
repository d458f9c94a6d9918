//! Unified view over the JSONL datasets of every task, plus JSONL helpers.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{parse_grid, GridMap, RenderPalette};
use crate::nav::{NavQaRecord, NavTask};
use crate::nlnav::{NlNavRecord, RingRecord};
use crate::tiling::TilingQaRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    RoutePlanning,
    NextStep,
    Tiling,
    NlNavigation,
    RingNavigation,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::RoutePlanning,
        TaskKind::NextStep,
        TaskKind::Tiling,
        TaskKind::NlNavigation,
        TaskKind::RingNavigation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::RoutePlanning => "route_planning",
            TaskKind::NextStep => "next_step",
            TaskKind::Tiling => "tiling",
            TaskKind::NlNavigation => "nl_navigation",
            TaskKind::RingNavigation => "ring_navigation",
        }
    }

    /// Visual navigation and tiling have gradable visualizations.
    pub fn is_visual(self) -> bool {
        matches!(
            self,
            TaskKind::RoutePlanning | TaskKind::NextStep | TaskKind::Tiling
        )
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTask(s.to_string()))
    }
}

/// One evaluable question of any task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Instance {
    Nav(NavQaRecord),
    Tiling(TilingQaRecord),
    NlNav(NlNavRecord),
    Ring(RingRecord),
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        let task = v
            .get("task")
            .and_then(|t| t.as_str())
            .ok_or_else(|| D::Error::missing_field("task"))?;
        let kind = TaskKind::from_str(task).map_err(D::Error::custom)?;
        let inst = match kind {
            TaskKind::RoutePlanning | TaskKind::NextStep => {
                serde_json::from_value(v).map(Instance::Nav)
            }
            TaskKind::Tiling => serde_json::from_value(v).map(Instance::Tiling),
            TaskKind::NlNavigation => serde_json::from_value(v).map(Instance::NlNav),
            TaskKind::RingNavigation => serde_json::from_value(v).map(Instance::Ring),
        };
        inst.map_err(D::Error::custom)
    }
}

impl Instance {
    pub fn id(&self) -> &str {
        match self {
            Instance::Nav(r) => &r.id,
            Instance::Tiling(r) => &r.id,
            Instance::NlNav(r) => &r.id,
            Instance::Ring(r) => &r.id,
        }
    }

    pub fn task(&self) -> TaskKind {
        match self {
            Instance::Nav(r) => match r.task {
                NavTask::RoutePlanning => TaskKind::RoutePlanning,
                NavTask::NextStep => TaskKind::NextStep,
            },
            Instance::Tiling(_) => TaskKind::Tiling,
            Instance::NlNav(_) => TaskKind::NlNavigation,
            Instance::Ring(_) => TaskKind::RingNavigation,
        }
    }

    /// Ground truth as the text a correct answer must contain.
    pub fn gold_text(&self) -> String {
        match self {
            Instance::Nav(r) => r
                .gold
                .iter()
                .map(|d| d.name())
                .collect::<Vec<_>>()
                .join(", "),
            Instance::Tiling(r) => r.gold.clone(),
            Instance::NlNav(r) => r.gold_object.clone(),
            Instance::Ring(r) => r.gold_object.clone(),
        }
    }

    /// Words that mark a candidate answer line.
    pub fn answer_keywords(&self) -> Vec<String> {
        match self {
            Instance::Nav(_) => ["up", "down", "left", "right"].map(String::from).to_vec(),
            Instance::Tiling(_) => vec!["option".into()],
            Instance::NlNav(r) => r.landmarks.clone(),
            Instance::Ring(r) => r.landmarks.clone(),
        }
    }

    /// Number of reasoning steps `l_s` expected in a fully tracked answer.
    pub fn reasoning_steps(&self) -> usize {
        match self {
            Instance::Nav(r) => match r.task {
                NavTask::RoutePlanning => r.k,
                NavTask::NextStep => r.given_instructions.len() + 1,
            },
            Instance::Tiling(r) => r.masked_pieces.len(),
            Instance::NlNav(r) => r.instructions.len(),
            Instance::Ring(r) => r.moves.len(),
        }
    }
}

impl NavQaRecord {
    pub fn palette(&self) -> Result<RenderPalette> {
        Ok(RenderPalette::by_id(&self.palette_id)?)
    }

    pub fn map(&self) -> Result<GridMap> {
        Ok(parse_grid(&self.map_text, &self.palette()?)?.into_map()?)
    }
}

impl TilingQaRecord {
    pub fn palette(&self) -> Result<RenderPalette> {
        Ok(RenderPalette::by_id(&self.palette_id)?)
    }
}

/// Read one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_instances(path: &Path) -> Result<Vec<Instance>> {
    read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nav::generate_nav_dataset;

    #[test]
    fn nav_records_round_trip_through_instance() {
        let ds = generate_nav_dataset(2..=3).unwrap();
        let recs = ds.records(&RenderPalette::ascii()).unwrap();
        for r in recs {
            let line = serde_json::to_string(&r).unwrap();
            let inst: Instance = serde_json::from_str(&line).unwrap();
            assert_eq!(serde_json::to_string(&inst).unwrap(), line);
            assert!(inst.task().is_visual());
            if let Instance::Nav(n) = &inst {
                assert!(n.map().unwrap().path().len() > 1);
            }
        }
    }

    #[test]
    fn unknown_task_is_rejected() {
        let err = serde_json::from_str::<Instance>(r#"{"task":"juggling","id":"x"}"#).unwrap_err();
        assert!(err.to_string().contains("juggling"));
    }
}
