//! Execute model-proposed routes on a navigation map and aggregate
//! answer-level metrics.
//!
//! Each instruction moves to the end of the continuous road in its direction,
//! stopping early at the destination. An instruction whose first cell is an
//! obstacle or off the grid is ignored.

use serde::{Deserialize, Serialize};

use crate::answer::AnswerJudgment;
use crate::error::{Error, Result};
use crate::grid::{step, CellKind, Coord, Direction, GridMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IgnoreReason {
    Obstacle,
    Boundary,
}

/// How the temporal distance `t` is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgressMode {
    /// Turning points passed along the gold path at the final position, so
    /// turning back lowers progress.
    #[default]
    PathProgress,
    /// Number of executed (non-ignored) instructions, capped at k.
    ValidMoveCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub attempted: Vec<Direction>,
    /// Direction and resting cell of each executed instruction.
    pub executed: Vec<(Direction, Coord)>,
    pub ignored: Vec<(usize, IgnoreReason)>,
    pub final_pos: Coord,
    pub t: usize,
    pub k: usize,
    pub reached_dest: bool,
}

impl ExecutionTrace {
    pub fn completing_rate(&self) -> f64 {
        self.t as f64 / self.k as f64
    }
}

/// Indices into `path` where the route changes direction, plus both ends.
pub fn turning_indices(path: &[Coord]) -> Vec<usize> {
    let mut out = vec![0];
    for i in 1..path.len().saturating_sub(1) {
        let a = (
            path[i].row as i64 - path[i - 1].row as i64,
            path[i].col as i64 - path[i - 1].col as i64,
        );
        let b = (
            path[i + 1].row as i64 - path[i].row as i64,
            path[i + 1].col as i64 - path[i].col as i64,
        );
        if a != b {
            out.push(i);
        }
    }
    if path.len() > 1 {
        out.push(path.len() - 1);
    }
    out
}

/// Slide from `from` in direction `d`; `Err` if the first cell is blocked.
pub fn slide(map: &GridMap, from: Coord, d: Direction) -> Result<Coord, IgnoreReason> {
    let mut pos = from;
    let mut moved = false;
    loop {
        let next = step(pos, d).filter(|c| map.contains(*c));
        match next.and_then(|c| map.get(c).map(|k| (c, k))) {
            None if !moved => return Err(IgnoreReason::Boundary),
            Some((_, CellKind::Obstacle)) if !moved => return Err(IgnoreReason::Obstacle),
            None | Some((_, CellKind::Obstacle)) => return Ok(pos),
            Some((c, CellKind::Destination)) => return Ok(c),
            Some((c, _)) => {
                pos = c;
                moved = true;
            }
        }
    }
}

pub fn execute_instructions(map: &GridMap, dirs: &[Direction]) -> ExecutionTrace {
    execute_instructions_with(map, dirs, ProgressMode::PathProgress)
}

pub fn execute_instructions_with(
    map: &GridMap,
    dirs: &[Direction],
    mode: ProgressMode,
) -> ExecutionTrace {
    let path = map.path();
    let turns = turning_indices(&path);
    let k = turns.len() - 1;
    let mut pos = map.start();
    let mut executed = Vec::new();
    let mut ignored = Vec::new();
    for (i, &d) in dirs.iter().enumerate() {
        match slide(map, pos, d) {
            Ok(next) => {
                debug_assert!(map.is_passable(next));
                pos = next;
                executed.push((d, pos));
            }
            Err(reason) => ignored.push((i, reason)),
        }
    }
    let t = match mode {
        ProgressMode::PathProgress => {
            let idx = path.iter().position(|c| *c == pos).unwrap_or(0);
            turns.iter().filter(|&&ti| ti > 0 && ti <= idx).count()
        }
        ProgressMode::ValidMoveCount => executed.len().min(k),
    };
    ExecutionTrace {
        attempted: dirs.to_vec(),
        executed,
        ignored,
        final_pos: pos,
        t,
        k,
        reached_dest: pos == map.dest(),
    }
}

/// Round a fraction to a percentage with two decimals.
pub fn percent(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteMetrics {
    pub n: usize,
    /// Mean of t/k, as a percentage.
    pub completing_rate: f64,
    /// Share of routes with t = k, as a percentage.
    pub success_rate: f64,
}

pub fn aggregate_routes(traces: &[ExecutionTrace]) -> Result<RouteMetrics> {
    aggregate_progress(&traces.iter().map(|t| (t.t, t.k)).collect::<Vec<_>>())
}

/// Route metrics from `(t, k)` pairs.
pub fn aggregate_progress(progress: &[(usize, usize)]) -> Result<RouteMetrics> {
    if progress.is_empty() {
        return Err(Error::Empty("route traces"));
    }
    let n = progress.len() as f64;
    let completing: f64 = progress
        .iter()
        .map(|&(t, k)| t as f64 / k as f64)
        .sum::<f64>()
        / n;
    let success = progress.iter().filter(|&&(t, k)| t == k).count() as f64 / n;
    Ok(RouteMetrics {
        n: progress.len(),
        completing_rate: percent(completing),
        success_rate: percent(success),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMetrics {
    pub n: usize,
    pub correct: usize,
    /// As a percentage.
    pub accuracy: f64,
}

pub fn aggregate_answers(judgments: &[AnswerJudgment]) -> Result<AccuracyMetrics> {
    if judgments.is_empty() {
        return Err(Error::Empty("answer judgments"));
    }
    let correct = judgments.iter().filter(|j| j.correct).count();
    Ok(AccuracyMetrics {
        n: judgments.len(),
        correct,
        accuracy: percent(correct as f64 / judgments.len() as f64),
    })
}
