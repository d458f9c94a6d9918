//! Visual state tracking inside model transcripts.
//!
//! A visualization block is a maximal run of at least two consecutive lines
//! whose tokens all come from the task alphabet (palette glyphs plus marker
//! symbols such as digits, arrows and emoji pins) and whose token counts are
//! equal. Only blocks that start before the final answer count toward `l_v`.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::answer::{extract_answer, ExtractionRule};
use crate::dataset::{Instance, TaskKind};
use crate::error::{Error, Result};
use crate::grid::{
    parse_grid, split_rows, tokenize_with, CellKind, Coord, ParsedCell, RenderPalette,
};
use crate::nav::{NavQaRecord, NavTask};
use crate::sim::{execute_instructions, percent};
use crate::tiling::{
    solve_tiling, Backend, PieceKind, TilingProblem, TilingQaRecord, RECT_HEIGHT, RECT_WIDTH,
};

/// Symbols models use to mark positions and paths inside a drawn grid.
pub const MARKERS: &[&str] = &[
    "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "←", "↑", "→", "↓", "⬅", "⬆", "➡", "⬇", "↖",
    "↗", "↘", "↙", "^", "v", "<", ">", "*", "@", "x", "X", "o", "O", "+", "P", "🚶", "🧍", "🔴",
    "🟢", "✅", "❌", "📍", "⭐", "🚗", "🤖", "🔵", "⚫", "⚪", "🟩", "🟧", "🟪", "🟫", "🔺",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VizBlock {
    /// Byte offsets of the block in the raw transcript.
    pub start: usize,
    pub end: usize,
    /// Block lines with variation selectors removed.
    pub text: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub raw: String,
    pub visualizations: Vec<VizBlock>,
    pub answer_start: usize,
    pub answer_rule: ExtractionRule,
    pub l_s: usize,
    pub l_v: usize,
}

impl Transcript {
    /// Last block counted in `l_v`.
    pub fn last_visualization(&self) -> Option<&VizBlock> {
        self.l_v.checked_sub(1).map(|i| &self.visualizations[i])
    }

    pub fn complete(&self) -> bool {
        self.l_v == self.l_s
    }

    pub fn partial(&self) -> bool {
        self.l_v > 0
    }
}

fn strip_selectors(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, '\u{FE0E}' | '\u{FE0F}'))
        .collect()
}

fn palette_glyphs(p: &RenderPalette) -> Vec<&str> {
    [&p.start, &p.dest, &p.road, &p.obstacle, &p.blank]
        .into_iter()
        .chain(p.pieces.iter())
        .map(String::as_str)
        .collect()
}

struct Alphabet<'a> {
    known: Vec<&'a str>,
    glyphs: HashSet<&'a str>,
}

impl<'a> Alphabet<'a> {
    fn new(p: &'a RenderPalette) -> Self {
        let glyphs: HashSet<&str> = palette_glyphs(p).into_iter().collect();
        let mut known: Vec<&str> = glyphs
            .iter()
            .copied()
            .chain(MARKERS.iter().copied())
            .collect();
        known.sort_by_key(|g| (std::cmp::Reverse(g.len()), *g));
        known.dedup();
        Alphabet { known, glyphs }
    }

    /// Token count and palette-glyph count if the line is a grid row.
    fn grid_line(&self, line: &str) -> Option<(usize, usize)> {
        let tokens = tokenize_with(&strip_selectors(line), &self.known);
        if tokens.len() < 2 || !tokens.iter().all(|t| self.known.contains(&t.as_str())) {
            return None;
        }
        let glyphs = tokens
            .iter()
            .filter(|t| self.glyphs.contains(t.as_str()))
            .count();
        Some((tokens.len(), glyphs))
    }
}

/// All visualization blocks in `raw`, in order.
pub fn find_viz_blocks(raw: &str, palette: &RenderPalette) -> Vec<VizBlock> {
    let alphabet = Alphabet::new(palette);
    let mut blocks = Vec::new();
    // (line start, line end, tokens, glyphs) of the current equal-width run
    let mut run: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut flush = |run: &mut Vec<(usize, usize, usize, usize)>| {
        if run.len() >= 2 && run.iter().any(|r| r.3 > 0) {
            let start = run[0].0;
            let end = run[run.len() - 1].1;
            let text = raw[start..end]
                .split('\n')
                .map(|l| strip_selectors(l.trim_end_matches('\r')))
                .collect::<Vec<_>>()
                .join("\n");
            blocks.push(VizBlock {
                start,
                end,
                text,
                rows: run.len(),
                cols: run[0].2,
            });
        }
        run.clear();
    };
    let mut offset = 0;
    for line in raw.split('\n') {
        let (start, end) = (offset, offset + line.len());
        offset = end + 1;
        match alphabet.grid_line(line) {
            Some((tokens, glyphs)) => {
                if run.last().is_some_and(|r| r.2 != tokens) {
                    flush(&mut run);
                }
                run.push((start, end, tokens, glyphs));
            }
            None => flush(&mut run),
        }
    }
    flush(&mut run);
    blocks
}

fn answer_region(raw: &str, keywords: &[&str]) -> (usize, ExtractionRule) {
    let ex = extract_answer(raw, keywords);
    match ex.rule {
        ExtractionRule::Marker | ExtractionRule::KeywordLine => (ex.start, ex.rule),
        ExtractionRule::WholeOutput | ExtractionRule::Empty => (raw.len(), ex.rule),
    }
}

/// Split a transcript into visualization blocks and locate the answer.
pub fn parse_transcript_with(
    raw: &str,
    palette: &RenderPalette,
    keywords: &[&str],
    l_s: usize,
) -> Transcript {
    let visualizations = find_viz_blocks(raw, palette);
    let (answer_start, answer_rule) = answer_region(raw, keywords);
    // a keyword line drawn inside a grid still leaves that grid before the answer
    let l_v = visualizations
        .iter()
        .filter(|b| b.start < answer_start || (b.start <= answer_start && answer_start < b.end))
        .count();
    Transcript {
        raw: raw.to_string(),
        visualizations,
        answer_start,
        answer_rule,
        l_s: l_s.max(1),
        l_v,
    }
}

pub fn parse_transcript(raw: &str, instance: &Instance) -> Result<Transcript> {
    let palette = instance_palette(instance)?;
    let keywords = instance.answer_keywords();
    let kw: Vec<&str> = keywords.iter().map(String::as_str).collect();
    Ok(parse_transcript_with(
        raw,
        &palette,
        &kw,
        instance.reasoning_steps(),
    ))
}

fn instance_palette(instance: &Instance) -> Result<RenderPalette> {
    match instance {
        Instance::Nav(r) => r.palette(),
        Instance::Tiling(r) => r.palette(),
        Instance::NlNav(_) | Instance::Ring(_) => Ok(RenderPalette::ascii()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VizTag {
    Unparseable,
    DimensionMismatch,
    /// A marked cell sits on a true obstacle.
    Obstacle,
    /// A fixed tiling cell was drawn over or erased.
    Overlap,
    /// Accurate last visualization but a wrong final answer.
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VizGrade {
    pub compliant: bool,
    pub accurate: bool,
    pub reasons: Vec<VizTag>,
}

impl VizGrade {
    fn failed(tag: VizTag) -> Self {
        VizGrade {
            compliant: false,
            accurate: false,
            reasons: vec![tag],
        }
    }
}

/// Grade the last visualization before the answer; `None` when the task has
/// no gradable drawing or the transcript has no visualization.
pub fn grade_last_visualization(tr: &Transcript, instance: &Instance) -> Result<Option<VizGrade>> {
    let Some(block) = tr.last_visualization() else {
        return Ok(None);
    };
    let grade = match instance {
        Instance::Nav(r) => grade_nav(&block.text, r)?,
        Instance::Tiling(r) => grade_tiling(&block.text, r)?,
        Instance::NlNav(_) | Instance::Ring(_) => return Ok(None),
    };
    debug_assert!(!grade.accurate || grade.compliant);
    Ok(Some(grade))
}

/// Positions that count as the current state of a navigation question.
fn nav_states(rec: &NavQaRecord, map: &crate::grid::GridMap) -> Vec<Coord> {
    match rec.task {
        NavTask::RoutePlanning => vec![execute_instructions(map, &rec.gold).final_pos],
        NavTask::NextStep => {
            let mut full = rec.given_instructions.clone();
            full.extend(&rec.gold);
            vec![
                execute_instructions(map, &rec.given_instructions).final_pos,
                execute_instructions(map, &full).final_pos,
            ]
        }
    }
}

/// Navigation drawing grade. Cells drawn differently from the map are marks;
/// the drawing is compliant when no mark sits on an obstacle and accurate
/// when the marks show either the current position alone or the trail from
/// the start up to it.
pub fn grade_nav(block: &str, rec: &NavQaRecord) -> Result<VizGrade> {
    let palette = rec.palette()?;
    let map = rec.map()?;
    let Ok(parsed) = parse_grid(block, &palette) else {
        return Ok(VizGrade::failed(VizTag::Unparseable));
    };
    let known = parsed
        .cells
        .iter()
        .filter(|c| matches!(c, ParsedCell::Known(_)))
        .count();
    if known * 2 < parsed.cells.len() {
        return Ok(VizGrade::failed(VizTag::Unparseable));
    }
    if parsed.width != map.width() || parsed.height != map.height() {
        return Ok(VizGrade::failed(VizTag::DimensionMismatch));
    }
    let mut marks = BTreeSet::new();
    let mut on_obstacle = false;
    for c in map.coords() {
        let truth = map.get(c).expect("coord in map");
        let drawn = parsed.get(c).expect("same dimensions");
        match drawn {
            ParsedCell::Known(k) if *k == truth => {}
            ParsedCell::Known(CellKind::Obstacle) => {
                marks.insert(c);
            }
            _ => {
                if truth == CellKind::Obstacle {
                    on_obstacle = true;
                }
                marks.insert(c);
            }
        }
    }
    if on_obstacle {
        return Ok(VizGrade::failed(VizTag::Obstacle));
    }
    let path = map.path();
    let start = map.start();
    marks.remove(&start);
    let accurate = nav_states(rec, &map).into_iter().any(|cur| {
        let Some(idx) = path.iter().position(|c| *c == cur) else {
            return false;
        };
        let trail: BTreeSet<Coord> = path[..=idx]
            .iter()
            .copied()
            .filter(|c| *c != start)
            .collect();
        if !marks.is_subset(&trail) {
            return false;
        }
        let only_position = marks.len() == 1 && marks.contains(&cur);
        let full_trail = trail.iter().all(|c| *c == cur || marks.contains(c))
            && (marks.contains(&cur) || cur == map.dest());
        only_position || (full_trail && !marks.is_empty())
    });
    Ok(VizGrade {
        compliant: true,
        accurate,
        reasons: Vec::new(),
    })
}

/// Tiling drawing grade: compliant when every fixed cell keeps its glyph,
/// accurate when the hole is filled consistently with a completion that uses
/// the gold variant (cells of pieces other than the query may stay blank).
pub fn grade_tiling(block: &str, rec: &TilingQaRecord) -> Result<VizGrade> {
    let palette = rec.palette()?;
    let Ok(drawn) = split_rows(block, |l| palette.tokenize(l)) else {
        return Ok(VizGrade::failed(VizTag::Unparseable));
    };
    let fill_glyphs: HashSet<&str> = palette
        .pieces
        .iter()
        .chain(std::iter::once(&palette.blank))
        .map(String::as_str)
        .collect();
    let total: usize = drawn.iter().map(Vec::len).sum();
    let known = drawn
        .iter()
        .flatten()
        .filter(|g| fill_glyphs.contains(g.as_str()))
        .count();
    if known * 2 < total {
        return Ok(VizGrade::failed(VizTag::Unparseable));
    }
    if drawn.len() != RECT_HEIGHT || drawn[0].len() != RECT_WIDTH {
        return Ok(VizGrade::failed(VizTag::DimensionMismatch));
    }
    let given = split_rows(&rec.rect_text, |l| palette.tokenize(l))?;
    let mut hole = Vec::new();
    for r in 0..RECT_HEIGHT {
        for c in 0..RECT_WIDTH {
            let (g, d) = (&given[r][c], &drawn[r][c]);
            if *g == palette.blank {
                hole.push(Coord::new(r, c));
            } else if d != g {
                return Ok(VizGrade::failed(VizTag::Overlap));
            }
        }
    }
    let glyph = |p: PieceKind| palette.pieces[p.index()].as_str();
    // does the drawing agree with this completion of the hole?
    let matches = |owner: &dyn Fn(Coord) -> Option<PieceKind>| {
        hole.iter().all(|&c| {
            let d = drawn[c.row][c.col].as_str();
            match owner(c) {
                Some(p) if p == rec.query_piece => d == glyph(p),
                Some(p) => d == palette.blank || d == glyph(p),
                None => false,
            }
        })
    };
    let solution = split_rows(&rec.solution_text, |l| palette.tokenize(l))?;
    let stored = |c: Coord| {
        if rec.query_cells.contains(&c) {
            return Some(rec.query_piece);
        }
        let s = solution[c.row][c.col].as_str();
        rec.masked_pieces
            .iter()
            .copied()
            .find(|&p| p != rec.query_piece && glyph(p) == s)
    };
    let mut accurate = matches(&stored);
    if !accurate {
        // identical puzzles can hide different solutions; any completion
        // using the gold variant is an accurate final state
        let query_slot = rec
            .masked_pieces
            .iter()
            .position(|&p| p == rec.query_piece)
            .ok_or_else(|| Error::Invalid(format!("{}: query piece is not masked", rec.id)))?;
        let problem =
            TilingProblem::region(RECT_WIDTH, RECT_HEIGHT, hole.clone(), &rec.masked_pieces)
                .with_fixed_variant(query_slot, rec.offered_variants[rec.gold_index]);
        accurate = solve_tiling(&problem, Backend::Dlx, true).iter().any(|a| {
            matches(&|c: Coord| a.iter().find(|pl| pl.cells.contains(&c)).map(|pl| pl.piece))
        });
    }
    Ok(VizGrade {
        compliant: true,
        accurate,
        reasons: Vec::new(),
    })
}

/// Per-transcript analysis line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub id: String,
    pub task: TaskKind,
    pub setting: String,
    pub l_s: usize,
    pub l_v: usize,
    pub complete: bool,
    pub partial: bool,
    pub compliant: Option<bool>,
    pub accurate: Option<bool>,
    pub reasons: Vec<VizTag>,
    pub answer_correct: bool,
}

pub fn analyze_transcript(
    instance: &Instance,
    setting: &str,
    raw: &str,
    answer_correct: bool,
) -> Result<AnalysisRecord> {
    let tr = parse_transcript(raw, instance)?;
    let grade = grade_last_visualization(&tr, instance)?;
    let mut reasons = grade
        .as_ref()
        .map(|g| g.reasons.clone())
        .unwrap_or_default();
    if grade.as_ref().is_some_and(|g| g.accurate) && !answer_correct {
        reasons.push(VizTag::Inconsistent);
    }
    Ok(AnalysisRecord {
        id: instance.id().to_string(),
        task: instance.task(),
        setting: setting.to_string(),
        l_s: tr.l_s,
        l_v: tr.l_v,
        complete: tr.complete(),
        partial: tr.partial(),
        compliant: grade.as_ref().map(|g| g.compliant),
        accurate: grade.as_ref().map(|g| g.accurate),
        reasons,
        answer_correct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingRates {
    pub n: usize,
    /// Percentages.
    pub complete: f64,
    pub partial: f64,
}

/// Complete (`l_v == l_s`) and partial (`l_v > 0`) tracking rates over
/// `(l_v, l_s)` pairs.
pub fn tracking_rates(lengths: &[(usize, usize)]) -> Result<TrackingRates> {
    if lengths.is_empty() {
        return Err(Error::Empty("transcripts"));
    }
    let n = lengths.len() as f64;
    let complete = lengths.iter().filter(|(v, s)| v == s).count() as f64 / n;
    let partial = lengths.iter().filter(|(v, _)| *v > 0).count() as f64 / n;
    Ok(TrackingRates {
        n: lengths.len(),
        complete: percent(complete),
        partial: percent(partial),
    })
}

/// P(answer correct | last visualization accurate) as a fraction, or `None`
/// when no visualization is accurate.
pub fn spatial_understanding_accuracy(graded: &[(Option<VizGrade>, bool)]) -> Option<f64> {
    let accurate: Vec<bool> = graded
        .iter()
        .filter(|(g, _)| g.as_ref().is_some_and(|g| g.accurate))
        .map(|(_, correct)| *correct)
        .collect();
    (!accurate.is_empty())
        .then(|| accurate.iter().filter(|c| **c).count() as f64 / accurate.len() as f64)
}
