//! Offline provider that answers from the ground truth. Under visualizing
//! settings it draws the true state after every reasoning step.

use super::prompt::PromptSetting;
use super::provider::{ChatPayload, Provider, ProviderError};
use crate::dataset::Instance;
use crate::grid::{render_grid, step, Coord, RenderPalette};
use crate::nav::{NavQaRecord, NavTask};
use crate::nlnav::{normalize_ring, LandmarkMap, NlNavRecord, RingRecord, GRID_SIDE};
use crate::sim::execute_instructions;
use crate::tiling::TilingQaRecord;

pub const POSITION_MARK: &str = "*";

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleProvider;

fn setting_of(payload: &ChatPayload) -> PromptSetting {
    let content = payload
        .messages
        .last()
        .map(|m| m.content.as_str())
        .unwrap_or("");
    // longest suffix first: the ascii-art sentence extends the plain one
    let mut all = PromptSetting::ALL;
    all.sort_by_key(|s| std::cmp::Reverse(s.suffix().len()));
    all.into_iter()
        .find(|s| content.ends_with(s.suffix()))
        .unwrap_or(PromptSetting::Cot)
}

impl Provider for OracleProvider {
    fn name(&self) -> &str {
        "oracle"
    }

    fn complete(
        &self,
        instance: &Instance,
        payload: &ChatPayload,
    ) -> Result<String, ProviderError> {
        let viz = setting_of(payload).visualizes();
        oracle_transcript(instance, viz).map_err(|e| ProviderError::Fatal(e.to_string()))
    }
}

/// Gold reasoning with one step per expected reasoning step, optionally with
/// a drawing after each, followed by the gold answer.
pub fn oracle_transcript(instance: &Instance, visualize: bool) -> crate::Result<String> {
    let steps = match instance {
        Instance::Nav(r) => nav_steps(r)?,
        Instance::Tiling(r) => tiling_steps(r)?,
        Instance::NlNav(r) => nlnav_steps(r)?,
        Instance::Ring(r) => ring_steps(r),
    };
    let mut out = String::new();
    for (text, grid) in steps {
        out.push_str(&text);
        out.push('\n');
        if visualize {
            out.push_str(&grid);
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str(&format!("The answer is: {}", instance.gold_text()));
    Ok(out)
}

fn mark(rows: &mut [Vec<String>], c: Coord) {
    rows[c.row][c.col] = POSITION_MARK.to_string();
}

fn join_rows(rows: &[Vec<String>]) -> String {
    rows.iter()
        .map(|r| r.concat())
        .collect::<Vec<_>>()
        .join("\n")
}

fn nav_steps(r: &NavQaRecord) -> crate::Result<Vec<(String, String)>> {
    let palette = r.palette()?;
    let map = r.map()?;
    let base: Vec<Vec<String>> = render_grid(&map, &palette)?
        .split('\n')
        .map(|l| palette.tokenize(l))
        .collect();
    let moves = match r.task {
        NavTask::RoutePlanning => r.gold.clone(),
        NavTask::NextStep => [r.given_instructions.clone(), r.gold.clone()].concat(),
    };
    Ok((1..=moves.len())
        .map(|i| {
            let pos = execute_instructions(&map, &moves[..i]).final_pos;
            let mut rows = base.clone();
            mark(&mut rows, pos);
            (
                format!("Step {i}: move {} to {pos}.", moves[i - 1]),
                join_rows(&rows),
            )
        })
        .collect())
}

fn tiling_steps(r: &TilingQaRecord) -> crate::Result<Vec<(String, String)>> {
    let palette = r.palette()?;
    let mut rows: Vec<Vec<String>> = r
        .rect_text
        .split('\n')
        .map(|l| palette.tokenize(l))
        .collect();
    let solution: Vec<Vec<String>> = r
        .solution_text
        .split('\n')
        .map(|l| palette.tokenize(l))
        .collect();
    let mut order = r.masked_pieces.clone();
    // place the query piece last so the final drawing answers the question
    order.sort_by_key(|p| *p == r.query_piece);
    let mut out = Vec::new();
    for (i, piece) in order.iter().enumerate() {
        let glyph = &palette.pieces[piece.index()];
        for (row, sol) in rows.iter_mut().zip(&solution) {
            for (cell, s) in row.iter_mut().zip(sol) {
                if *cell == palette.blank && s == glyph {
                    cell.clone_from(s);
                }
            }
        }
        out.push((
            format!("Step {}: place the {piece} tetromino.", i + 1),
            join_rows(&rows),
        ));
    }
    Ok(out)
}

fn nlnav_steps(r: &NlNavRecord) -> crate::Result<Vec<(String, String)>> {
    let map = LandmarkMap::new(r.landmarks.clone())?;
    let road = RenderPalette::ascii().road;
    let mut pos = map
        .position_of(&r.start_object)
        .ok_or_else(|| crate::Error::Invalid(format!("{}: start object not on the map", r.id)))?;
    let mut out = Vec::new();
    for (i, d) in r.instructions.iter().enumerate() {
        pos = step(pos, *d)
            .filter(|c| c.row < GRID_SIDE && c.col < GRID_SIDE)
            .ok_or_else(|| crate::Error::Invalid(format!("{}: walk leaves the grid", r.id)))?;
        let mut rows = vec![vec![road.clone(); GRID_SIDE]; GRID_SIDE];
        mark(&mut rows, pos);
        let name = map.name_at(pos).unwrap_or_default();
        out.push((
            format!("Step {}: go {d}, reaching the {name}.", i + 1),
            join_rows(&rows),
        ));
    }
    Ok(out)
}

/// Ring drawn as two rows: indices run left to right on top, then right to
/// left on the bottom.
fn ring_grid(size: usize, pos: usize) -> String {
    let p = RenderPalette::ascii();
    let width = size.div_ceil(2);
    let mut rows = vec![vec![p.road.clone(); width], vec![p.obstacle.clone(); width]];
    for i in width..size {
        rows[1][width - 1 - (i - width)] = p.road.clone();
    }
    let cell = if pos < width {
        Coord::new(0, pos)
    } else {
        Coord::new(1, width - 1 - (pos - width))
    };
    mark(&mut rows, cell);
    join_rows(&rows)
}

fn ring_steps(r: &RingRecord) -> Vec<(String, String)> {
    (1..=r.moves.len())
        .map(|i| {
            let m = r.moves[i - 1];
            let pos = (r.start_index + normalize_ring(&r.moves[..i], r.ring_size)) % r.ring_size;
            (
                format!(
                    "Step {i}: go {} by {} steps, reaching the {}.",
                    m.rotation.phrase(),
                    m.steps,
                    r.landmarks[pos]
                ),
                ring_grid(r.ring_size, pos),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_layout() {
        assert_eq!(ring_grid(12, 0), "*.....\n......");
        assert_eq!(ring_grid(5, 3), "...\n#.*");
    }
}
