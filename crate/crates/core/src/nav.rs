//! Visual-navigation dataset generation.
//!
//! A k-hop map is produced in three steps: enumerate every axis-alternating
//! direction sequence, simulate it on an unbounded lattice while growing
//! segment lengths until the walk is self-avoiding, then crop the traced
//! points to their bounding box. Every cell not on the walk is an obstacle,
//! so each map has exactly one route.

use std::collections::HashSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::grid::{render_grid, CellKind, Coord, Direction, GridError, GridMap, RenderPalette};

/// Directions of a k-hop route with the length of each straight segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionPlan {
    directions: Vec<Direction>,
    distances: Vec<u32>,
}

impl InstructionPlan {
    pub fn new(directions: Vec<Direction>, distances: Vec<u32>) -> Result<Self, String> {
        if directions.is_empty() || directions.len() != distances.len() {
            return Err("plan needs one distance per direction".into());
        }
        if !alternates(&directions) {
            return Err("directions must alternate between axes".into());
        }
        if distances.contains(&0) {
            return Err("distances must be positive".into());
        }
        Ok(InstructionPlan {
            directions,
            distances,
        })
    }

    pub fn k(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn distances(&self) -> &[u32] {
        &self.distances
    }

    /// Lattice points visited from the origin, in walk order.
    pub fn lattice_points(&self) -> Vec<(i64, i64)> {
        trace(&self.directions, &self.distances)
    }
}

fn alternates(dirs: &[Direction]) -> bool {
    dirs.windows(2)
        .all(|w| w[0].is_vertical() != w[1].is_vertical())
}

fn trace(dirs: &[Direction], dist: &[u32]) -> Vec<(i64, i64)> {
    let mut pts = vec![(0i64, 0i64)];
    for (d, n) in dirs.iter().zip(dist) {
        let (dr, dc) = d.delta();
        for _ in 0..*n {
            let (r, c) = *pts.last().unwrap();
            pts.push((r + dr, c + dc));
        }
    }
    pts
}

/// All 2^{k+1} axis-alternating sequences of length `k`.
///
/// The first direction cycles Up, Down, Left, Right; each later direction is a
/// binary choice between the two perpendicular directions (first choice =
/// Left for a vertical predecessor, Up for a horizontal one), most significant
/// choice first. A sequence's index in this list is its `config_id`.
pub fn enumerate_direction_sequences(k: usize) -> Vec<Vec<Direction>> {
    assert!(k >= 1, "k must be at least 1");
    let turns = k - 1;
    let mut out = Vec::with_capacity(4 << turns);
    for first in Direction::ALL {
        for bits in 0..(1usize << turns) {
            let mut seq = Vec::with_capacity(k);
            seq.push(first);
            for j in (0..turns).rev() {
                let prev = *seq.last().unwrap();
                seq.push(prev.perpendicular()[(bits >> j) & 1]);
            }
            out.push(seq);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Conflict {
    /// a lattice point is visited twice
    Revisit,
    /// a new point revisits or is 4-adjacent to an earlier, non-preceding point
    Touch,
}

/// Index of the first segment whose traced points conflict with earlier ones.
fn first_conflict(dirs: &[Direction], dist: &[u32], mode: Conflict) -> Option<usize> {
    let mut seen: HashSet<(i64, i64)> = HashSet::from([(0, 0)]);
    let mut prev = (0i64, 0i64);
    for (seg, (d, n)) in dirs.iter().zip(dist).enumerate() {
        let (dr, dc) = d.delta();
        for _ in 0..*n {
            let p = (prev.0 + dr, prev.1 + dc);
            if seen.contains(&p) {
                return Some(seg);
            }
            if mode == Conflict::Touch
                && Direction::ALL.iter().any(|a| {
                    let (ar, ac) = a.delta();
                    let q = (p.0 + ar, p.1 + ac);
                    q != prev && seen.contains(&q)
                })
            {
                return Some(seg);
            }
            seen.insert(p);
            prev = p;
        }
    }
    None
}

/// Grow segment lengths until the walk never revisits a lattice point.
///
/// Segments are checked in walk order. While segment `i` revisits an earlier
/// point, the distance of instruction `i - 1` is increased by one. If that
/// increase makes an earlier segment collide, the overlap cannot be resolved
/// in this single pass and the sequence is dropped.
fn resolve_overlaps(dirs: &[Direction]) -> Option<Vec<u32>> {
    let mut dist = vec![1u32; dirs.len()];
    let budget = bump_budget(dirs.len());
    for i in 1..dirs.len() {
        loop {
            match first_conflict(&dirs[..=i], &dist[..=i], Conflict::Revisit) {
                None => break,
                Some(seg) if seg < i => return None,
                Some(_) => {
                    dist[i - 1] += 1;
                    if dist.iter().sum::<u32>() > budget {
                        return None;
                    }
                }
            }
        }
    }
    Some(dist)
}

/// Widen a self-avoiding walk until no two non-consecutive points are
/// 4-adjacent, so the rendered map has no shortcut between path cells. A
/// conflict in segment `j` lengthens instruction `j - 1`, which may push the
/// conflict further back.
fn separate(dirs: &[Direction], mut dist: Vec<u32>) -> Option<Vec<u32>> {
    let budget = bump_budget(dirs.len());
    for i in 1..dirs.len() {
        while let Some(seg) = first_conflict(&dirs[..=i], &dist[..=i], Conflict::Touch) {
            if seg == 0 {
                return None;
            }
            dist[seg - 1] += 1;
            if dist.iter().sum::<u32>() > budget {
                return None;
            }
        }
    }
    Some(dist)
}

fn bump_budget(k: usize) -> u32 {
    (4 * k * k + 16) as u32
}

/// Simulate a direction sequence into a plan, or `None` when the overlap rule
/// gives up (see [`resolve_overlaps`]).
pub fn simulate_plan(dirs: &[Direction]) -> Option<InstructionPlan> {
    if dirs.is_empty() || !alternates(dirs) {
        return None;
    }
    let dist = resolve_overlaps(dirs)?;
    let dist = separate(dirs, dist)?;
    InstructionPlan::new(dirs.to_vec(), dist).ok()
}

/// A generated map together with the plan that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NavMapRecord {
    pub k: usize,
    pub config_id: usize,
    pub plan: InstructionPlan,
    pub map: GridMap,
    /// Every path cell from start to destination.
    pub path: Vec<Coord>,
    /// Indices into `path` of the turning points s_0 … s_k.
    pub turning_points: Vec<usize>,
}

impl NavMapRecord {
    pub fn id(&self) -> String {
        format!("nav-k{}-c{:03}", self.k, self.config_id)
    }
}

/// Crop the traced points to their bounding box: first point start, last
/// point destination, other traced points road, everything else obstacle.
pub fn render_nav_map(config_id: usize, plan: InstructionPlan) -> Result<NavMapRecord, GridError> {
    let pts = plan.lattice_points();
    let min_r = pts.iter().map(|p| p.0).min().unwrap();
    let min_c = pts.iter().map(|p| p.1).min().unwrap();
    let max_r = pts.iter().map(|p| p.0).max().unwrap();
    let max_c = pts.iter().map(|p| p.1).max().unwrap();
    let height = (max_r - min_r + 1) as usize;
    let width = (max_c - min_c + 1) as usize;
    let path: Vec<Coord> = pts
        .iter()
        .map(|&(r, c)| Coord::new((r - min_r) as usize, (c - min_c) as usize))
        .collect();
    let mut cells = vec![CellKind::Obstacle; width * height];
    for c in &path {
        cells[c.row * width + c.col] = CellKind::Road;
    }
    let first = path[0];
    let last = *path.last().unwrap();
    cells[first.row * width + first.col] = CellKind::Start;
    cells[last.row * width + last.col] = CellKind::Destination;
    let map = GridMap::new(width, height, cells)?;

    let mut turning_points = vec![0];
    let mut acc = 0usize;
    for d in plan.distances() {
        acc += *d as usize;
        turning_points.push(acc);
    }
    Ok(NavMapRecord {
        k: plan.k(),
        config_id,
        plan,
        map,
        path,
        turning_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavTask {
    RoutePlanning,
    NextStep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NavQaInstance {
    pub kind: NavTask,
    pub map_id: String,
    pub k: usize,
    pub config_id: usize,
    /// Instructions already taken; empty for route planning.
    pub given: Vec<Direction>,
    /// Full route for route planning, the single next direction otherwise.
    pub gold: Vec<Direction>,
}

impl NavQaInstance {
    pub fn id(&self) -> String {
        match self.kind {
            NavTask::RoutePlanning => format!("{}-route", self.map_id),
            NavTask::NextStep => format!("{}-next{}", self.map_id, self.given.len()),
        }
    }
}

/// One route-planning question plus `k - 1` next-step questions (t = 1 … k-1).
pub fn emit_nav_qa(rec: &NavMapRecord) -> Vec<NavQaInstance> {
    let dirs = rec.plan.directions();
    let k = dirs.len();
    let map_id = rec.id();
    let mut out = vec![NavQaInstance {
        kind: NavTask::RoutePlanning,
        map_id: map_id.clone(),
        k,
        config_id: rec.config_id,
        given: Vec::new(),
        gold: dirs.to_vec(),
    }];
    for t in 1..k {
        out.push(NavQaInstance {
            kind: NavTask::NextStep,
            map_id: map_id.clone(),
            k,
            config_id: rec.config_id,
            given: dirs[..t].to_vec(),
            gold: vec![dirs[t]],
        });
    }
    out
}

/// JSONL line of the navigation dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavQaRecord {
    pub id: String,
    pub task: NavTask,
    pub k: usize,
    pub config_id: usize,
    pub map_text: String,
    pub given_instructions: Vec<Direction>,
    pub gold: Vec<Direction>,
    pub palette_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NavStats {
    pub k: usize,
    pub sequences: usize,
    pub maps: usize,
    pub route_planning: usize,
    pub next_step: usize,
}

#[derive(Debug, Clone)]
pub struct NavDataset {
    pub maps: Vec<NavMapRecord>,
    pub instances: Vec<NavQaInstance>,
    pub stats: Vec<NavStats>,
}

impl NavDataset {
    pub fn records(&self, palette: &RenderPalette) -> Result<Vec<NavQaRecord>, GridError> {
        let mut texts = std::collections::HashMap::new();
        for m in &self.maps {
            texts.insert(m.id(), render_grid(&m.map, palette)?);
        }
        Ok(self
            .instances
            .iter()
            .map(|q| NavQaRecord {
                id: q.id(),
                task: q.kind,
                k: q.k,
                config_id: q.config_id,
                map_text: texts[&q.map_id].clone(),
                given_instructions: q.given.clone(),
                gold: q.gold.clone(),
                palette_id: palette.id.clone(),
            })
            .collect())
    }
}

/// Generate every surviving map for each k, in `config_id` order.
pub fn generate_nav_dataset(ks: RangeInclusive<usize>) -> Result<NavDataset, GridError> {
    let mut maps = Vec::new();
    let mut instances = Vec::new();
    let mut stats = Vec::new();
    for k in ks {
        let seqs = enumerate_direction_sequences(k);
        let sequences = seqs.len();
        let before_maps = maps.len();
        let before_qa = instances.len();
        for (config_id, dirs) in seqs.into_iter().enumerate() {
            let Some(plan) = simulate_plan(&dirs) else {
                log::debug!("k={k} config {config_id}: overlap unresolved, dropped");
                continue;
            };
            let rec = render_nav_map(config_id, plan)?;
            instances.extend(emit_nav_qa(&rec));
            maps.push(rec);
        }
        let new_qa = &instances[before_qa..];
        stats.push(NavStats {
            k,
            sequences,
            maps: maps.len() - before_maps,
            route_planning: new_qa
                .iter()
                .filter(|q| q.kind == NavTask::RoutePlanning)
                .count(),
            next_step: new_qa
                .iter()
                .filter(|q| q.kind == NavTask::NextStep)
                .count(),
        });
    }
    Ok(NavDataset {
        maps,
        instances,
        stats,
    })
}
