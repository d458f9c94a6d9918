//! Masked-rectangle questions: hide pieces of distinct types, offer two
//! variants of one hidden piece, keep the question only when exactly one
//! offered variant can complete the hole.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::shapes::{variants, PieceKind, Placement};
use super::{enumerate_rect_tilings, is_tileable, TilingConfiguration, TilingProblem};
use crate::grid::{Coord, GridError, RenderPalette};
use crate::rng::{stream, StreamRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingQaInstance {
    pub config_id: usize,
    pub mask_count: usize,
    /// Index of this mask choice among all choices for the configuration.
    pub mask_id: usize,
    /// Hidden pieces, one per masked type, in piece-kind order.
    pub masked: Vec<Placement>,
    /// Position of the query piece in `masked`.
    pub query: usize,
    /// Two variant indices of the query piece's type.
    pub offered: [usize; 2],
    /// Which entry of `offered` is the placed variant.
    pub gold_index: usize,
    /// Distractors tried before one passed the uniqueness filter.
    pub distractor_draws: usize,
}

impl TilingQaInstance {
    pub fn query_piece(&self) -> PieceKind {
        self.masked[self.query].piece
    }

    pub fn id(&self) -> String {
        format!(
            "tile-m{}-c{:03}-s{}-{}",
            self.mask_count,
            self.config_id,
            self.mask_id,
            self.query_piece()
        )
    }

    /// Gold answer as it appears in the prompt's option labels.
    pub fn gold_label(&self) -> String {
        format!("Option {}", self.gold_index + 1)
    }
}

/// Every way to pick `mask_count` distinct piece types and one concrete piece
/// of each; entries are indices into `config.placements`.
pub fn mask_choices(config: &TilingConfiguration, mask_count: usize) -> Vec<Vec<usize>> {
    let kinds: Vec<PieceKind> = PieceKind::ALL
        .into_iter()
        .filter(|k| config.placements.iter().any(|p| p.piece == *k))
        .collect();
    let mut out = Vec::new();
    for types in combinations(&kinds, mask_count) {
        let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
        for t in types {
            let of_type: Vec<usize> = (0..config.placements.len())
                .filter(|&i| config.placements[i].piece == t)
                .collect();
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    of_type.iter().map(move |&i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out
}

fn combinations<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut with: Vec<Vec<T>> = combinations(&items[1..], k - 1)
        .into_iter()
        .map(|mut c| {
            c.insert(0, items[0]);
            c
        })
        .collect();
    with.extend(combinations(&items[1..], k));
    with
}

/// Can the hole left by `masked` be refilled with one piece per masked type
/// when the query piece must use `variant`?
pub fn is_completable(
    width: usize,
    height: usize,
    masked: &[Placement],
    query: usize,
    variant: usize,
) -> bool {
    let region: Vec<Coord> = masked
        .iter()
        .flat_map(|p| p.cells.iter().copied())
        .collect();
    let slots: Vec<PieceKind> = masked.iter().map(|p| p.piece).collect();
    is_tileable(
        &TilingProblem::region(width, height, region, &slots).with_fixed_variant(query, variant),
    )
}

/// Questions for every mask choice of `config`. The rng shuffles distractor
/// candidates and places the gold option. Returns the kept instances and
/// the number of questions dropped because no distractor was unique.
pub fn mask_and_emit_qa(
    config: &TilingConfiguration,
    config_id: usize,
    mask_count: usize,
    rng: &mut StreamRng,
) -> (Vec<TilingQaInstance>, usize) {
    let mut kept = Vec::new();
    let mut dropped = 0;
    for (mask_id, choice) in mask_choices(config, mask_count).into_iter().enumerate() {
        let masked: Vec<Placement> = choice
            .iter()
            .map(|&i| config.placements[i].clone())
            .collect();
        for query in 0..masked.len() {
            let truth = masked[query].variant;
            let mut candidates: Vec<usize> = variants(masked[query].piece)
                .iter()
                .map(|v| v.index)
                .filter(|&v| v != truth)
                .collect();
            candidates.shuffle(rng);
            let mut draws = 0;
            let distractor = candidates.into_iter().find(|&d| {
                draws += 1;
                !is_completable(config.width, config.height, &masked, query, d)
            });
            let gold_index = rng.gen_range(0..2usize);
            let Some(d) = distractor else {
                dropped += 1;
                continue;
            };
            let offered = if gold_index == 0 {
                [truth, d]
            } else {
                [d, truth]
            };
            kept.push(TilingQaInstance {
                config_id,
                mask_count,
                mask_id,
                masked: masked.clone(),
                query,
                offered,
                gold_index,
                distractor_draws: draws,
            });
        }
    }
    (kept, dropped)
}

/// Rectangle text with one glyph per piece type; `hidden` cells are blank.
pub fn render_rect(
    config: &TilingConfiguration,
    hidden: &[Placement],
    p: &RenderPalette,
) -> Result<String, GridError> {
    p.validate()?;
    if p.pieces.len() < PieceKind::ALL.len() {
        return Err(GridError::Palette(format!(
            "palette `{}` lacks piece glyphs",
            p.id
        )));
    }
    let mut cells = vec![p.blank.as_str(); config.width * config.height];
    for pl in &config.placements {
        if hidden.contains(pl) {
            continue;
        }
        for c in &pl.cells {
            cells[c.row * config.width + c.col] = &p.pieces[pl.piece.index()];
        }
    }
    Ok(cells
        .chunks(config.width)
        .map(|row| row.concat())
        .collect::<Vec<_>>()
        .join("\n"))
}

/// A variant drawn in its bounding box with the piece glyph on blank.
pub fn render_variant(
    piece: PieceKind,
    variant: usize,
    p: &RenderPalette,
) -> Result<String, GridError> {
    let v = variants(piece)
        .into_iter()
        .nth(variant)
        .ok_or_else(|| GridError::Palette(format!("{piece} has no variant {variant}")))?;
    let glyph = p
        .pieces
        .get(piece.index())
        .ok_or_else(|| GridError::Palette(format!("palette `{}` lacks piece glyphs", p.id)))?;
    Ok((0..v.height())
        .map(|r| {
            (0..v.width())
                .map(|c| {
                    if v.cells.contains(&Coord::new(r, c)) {
                        glyph.as_str()
                    } else {
                        p.blank.as_str()
                    }
                })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("\n"))
}

/// JSONL line of the tiling dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingQaRecord {
    pub id: String,
    pub task: String,
    pub mask_count: usize,
    pub config_id: usize,
    pub rect_text: String,
    pub query_piece: PieceKind,
    pub masked_pieces: Vec<PieceKind>,
    pub offered_variants: [usize; 2],
    pub offered_variant_texts: [String; 2],
    pub gold_index: usize,
    pub gold: String,
    /// Full rectangle; the visual state after all masked pieces are placed.
    pub solution_text: String,
    /// Query piece cells in the solution.
    pub query_cells: Vec<Coord>,
    pub palette_id: String,
}

impl TilingQaRecord {
    pub fn from_instance(
        q: &TilingQaInstance,
        config: &TilingConfiguration,
        p: &RenderPalette,
    ) -> Result<Self, GridError> {
        let piece = q.query_piece();
        Ok(TilingQaRecord {
            id: q.id(),
            task: "tiling".into(),
            mask_count: q.mask_count,
            config_id: q.config_id,
            rect_text: render_rect(config, &q.masked, p)?,
            query_piece: piece,
            masked_pieces: q.masked.iter().map(|m| m.piece).collect(),
            offered_variants: q.offered,
            offered_variant_texts: [
                render_variant(piece, q.offered[0], p)?,
                render_variant(piece, q.offered[1], p)?,
            ],
            gold_index: q.gold_index,
            gold: q.gold_label(),
            solution_text: render_rect(config, &[], p)?,
            query_cells: q.masked[q.query].cells.clone(),
            palette_id: p.id.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TilingStats {
    pub mask_count: usize,
    /// Distinct base tilings of the rectangle.
    pub tilings: usize,
    /// (tiling, mask choice) pairs.
    pub masked_configurations: usize,
    /// Masked configurations with at least one kept question.
    pub configurations_with_qa: usize,
    pub candidates: usize,
    pub qa_instances: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct TilingDataset {
    pub configurations: Vec<TilingConfiguration>,
    pub instances: Vec<TilingQaInstance>,
    pub stats: Vec<TilingStats>,
}

impl TilingDataset {
    pub fn records(&self, p: &RenderPalette) -> Result<Vec<TilingQaRecord>, GridError> {
        self.instances
            .iter()
            .map(|q| TilingQaRecord::from_instance(q, &self.configurations[q.config_id], p))
            .collect()
    }
}

/// Questions over every tiling of the 5×4 rectangle for each mask count.
pub fn generate_tiling_dataset(seed: u64, mask_counts: &[usize]) -> TilingDataset {
    let configurations = enumerate_rect_tilings();
    let mut instances = Vec::new();
    let mut stats = Vec::new();
    for &mc in mask_counts {
        let mut s = TilingStats {
            mask_count: mc,
            tilings: configurations.len(),
            masked_configurations: 0,
            configurations_with_qa: 0,
            candidates: 0,
            qa_instances: 0,
            dropped: 0,
        };
        for (config_id, config) in configurations.iter().enumerate() {
            let mut rng = stream(seed, &format!("tiling-m{mc}"), config_id as u64);
            let (kept, dropped) = mask_and_emit_qa(config, config_id, mc, &mut rng);
            let choices = mask_choices(config, mc).len();
            s.masked_configurations += choices;
            let mut with_qa: Vec<usize> = kept.iter().map(|q| q.mask_id).collect();
            with_qa.dedup();
            s.configurations_with_qa += with_qa.len();
            s.candidates += kept.len() + dropped;
            s.qa_instances += kept.len();
            s.dropped += dropped;
            instances.extend(kept);
        }
        stats.push(s);
    }
    TilingDataset {
        configurations,
        instances,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::RECT_PIECES;

    #[test]
    fn mask_choice_counts() {
        let configs = enumerate_rect_tilings();
        let c = &configs[0];
        assert_eq!(c.placements.len(), RECT_PIECES.len());
        // types {I,T,L}: pairs I-T 4, I-L 2, T-L 2; triple 2*2*1
        assert_eq!(mask_choices(c, 2).len(), 8);
        assert_eq!(mask_choices(c, 3).len(), 4);
        for ch in mask_choices(c, 3) {
            let mut kinds: Vec<_> = ch.iter().map(|&i| c.placements[i].piece).collect();
            kinds.dedup();
            assert_eq!(kinds.len(), 3);
        }
    }

    #[test]
    fn true_variant_always_completes() {
        let configs = enumerate_rect_tilings();
        let c = &configs[3];
        for ch in mask_choices(c, 2) {
            let masked: Vec<Placement> = ch.iter().map(|&i| c.placements[i].clone()).collect();
            for q in 0..masked.len() {
                assert!(is_completable(5, 4, &masked, q, masked[q].variant));
            }
        }
    }

    #[test]
    fn rendering() {
        let configs = enumerate_rect_tilings();
        let p = RenderPalette::ascii();
        let full = render_rect(&configs[0], &[], &p).unwrap();
        assert_eq!(full.lines().count(), 4);
        assert!(full.lines().all(|l| l.len() == 5));
        assert!(!full.contains('-'));
        assert_eq!(render_variant(PieceKind::I, 0, &p).unwrap(), "IIII");
        assert_eq!(render_variant(PieceKind::T, 0, &p).unwrap(), "TTT\n-T-");
    }
}
