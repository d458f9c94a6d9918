//! Polyomino tiling: shape algebra, the exact cover encoding solved by
//! dancing links, a SAT encoding of the same problem, and masked-rectangle
//! question generation.

pub mod exact_cover;
pub mod qa;
pub mod sat;
pub mod shapes;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::grid::Coord;
pub use exact_cover::{for_each_exact_cover, has_exact_cover, solve_exact_cover, ExactCoverMatrix};
pub use qa::{
    generate_tiling_dataset, mask_and_emit_qa, TilingDataset, TilingQaInstance, TilingQaRecord,
    TilingStats,
};
pub use sat::{all_models, Cnf, Lit};
pub use shapes::{
    legal_placements, variant_index_of, variants, PieceKind, Placement, Transform, Variant,
};

/// Rectangle used by the benchmark.
pub const RECT_WIDTH: usize = 5;
pub const RECT_HEIGHT: usize = 4;
/// Piece multiset of the benchmark: two I, two T, one L.
pub const RECT_PIECES: [PieceKind; 5] = [
    PieceKind::I,
    PieceKind::I,
    PieceKind::T,
    PieceKind::T,
    PieceKind::L,
];

/// Cover `region` (cells of a `width`×`height` rectangle) with one piece per
/// slot. A slot may be pinned to a single variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingProblem {
    pub width: usize,
    pub height: usize,
    region: Vec<Coord>,
    slots: Vec<PieceKind>,
    fixed_variant: Vec<Option<usize>>,
}

impl TilingProblem {
    /// The whole rectangle.
    pub fn rectangle(width: usize, height: usize, slots: &[PieceKind]) -> Self {
        let region = (0..height)
            .flat_map(|r| (0..width).map(move |c| Coord::new(r, c)))
            .collect();
        Self::region(width, height, region, slots)
    }

    /// A sub-region of the rectangle; cells outside it are already occupied.
    pub fn region(width: usize, height: usize, region: Vec<Coord>, slots: &[PieceKind]) -> Self {
        let region: BTreeSet<Coord> = region.into_iter().collect();
        assert!(
            region.iter().all(|c| c.row < height && c.col < width),
            "region cell outside the rectangle"
        );
        TilingProblem {
            width,
            height,
            region: region.into_iter().collect(),
            slots: slots.to_vec(),
            fixed_variant: vec![None; slots.len()],
        }
    }

    /// Only allow `variant` for `slot`.
    pub fn with_fixed_variant(mut self, slot: usize, variant: usize) -> Self {
        self.fixed_variant[slot] = Some(variant);
        self
    }

    pub fn region_cells(&self) -> &[Coord] {
        &self.region
    }

    pub fn slots(&self) -> &[PieceKind] {
        &self.slots
    }
}

/// Exact cover matrix plus the (slot, placement) behind each row.
///
/// Columns `0..slots` are the one-hot slot identity, followed by one column
/// per region cell in row-major order.
#[derive(Debug, Clone)]
pub struct CoverEncoding {
    pub matrix: ExactCoverMatrix,
    pub rows: Vec<(usize, Placement)>,
}

pub fn build_exact_cover_matrix(problem: &TilingProblem) -> CoverEncoding {
    let n_slots = problem.slots.len();
    let mut matrix = ExactCoverMatrix::new(n_slots + problem.region.len());
    let mut rows = Vec::new();
    for (slot, &piece) in problem.slots.iter().enumerate() {
        for p in legal_placements(piece, problem.width, problem.height) {
            if problem.fixed_variant[slot].is_some_and(|v| v != p.variant) {
                continue;
            }
            let cols: Option<Vec<usize>> = p
                .cells
                .iter()
                .map(|c| problem.region.binary_search(c).ok().map(|i| n_slots + i))
                .collect();
            let Some(mut cols) = cols else { continue };
            cols.push(slot);
            matrix.add_row(cols);
            rows.push((slot, p));
        }
    }
    CoverEncoding { matrix, rows }
}

/// Pieces of a tiling in canonical order (piece kind, then anchor, then cells).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TilingConfiguration {
    pub width: usize,
    pub height: usize,
    pub placements: Vec<Placement>,
}

impl TilingConfiguration {
    pub fn new(width: usize, height: usize, mut placements: Vec<Placement>) -> Self {
        placements.sort_by(|a, b| (a.piece, a.order_key()).cmp(&(b.piece, b.order_key())));
        TilingConfiguration {
            width,
            height,
            placements,
        }
    }

    /// Piece covering each cell, row-major; `None` for uncovered cells.
    pub fn cell_owners(&self) -> Vec<Option<usize>> {
        let mut owners = vec![None; self.width * self.height];
        for (i, p) in self.placements.iter().enumerate() {
            for c in &p.cells {
                owners[c.row * self.width + c.col] = Some(i);
            }
        }
        owners
    }

    /// Every cell covered exactly once.
    pub fn is_exact_tiling(&self) -> bool {
        let mut hits = vec![0u8; self.width * self.height];
        for p in &self.placements {
            for c in &p.cells {
                if c.row >= self.height || c.col >= self.width {
                    return false;
                }
                hits[c.row * self.width + c.col] += 1;
            }
        }
        hits.iter().all(|&h| h == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dlx,
    Sat,
}

/// A solution as one placement per slot, in slot order.
pub type SlotAssignment = Vec<Placement>;

/// Same-kind slots `i < j` must hold placements in increasing order key.
fn is_canonical(slots: &[PieceKind], assignment: &[Placement]) -> bool {
    (0..slots.len()).all(|i| {
        (i + 1..slots.len())
            .filter(|&j| slots[j] == slots[i])
            .all(|j| assignment[i].order_key() < assignment[j].order_key())
    })
}

/// Enumerate every slot assignment tiling the region. With
/// `symmetry_breaking`, assignments that merely permute identical pieces are
/// reported once. Results are sorted.
pub fn solve_tiling(
    problem: &TilingProblem,
    backend: Backend,
    symmetry_breaking: bool,
) -> Vec<SlotAssignment> {
    let enc = build_exact_cover_matrix(problem);
    let mut out = Vec::new();
    match backend {
        Backend::Dlx => for_each_exact_cover(&enc.matrix, |rows| {
            let a = decode_rows(&enc, rows, problem.slots.len());
            if !symmetry_breaking || is_canonical(&problem.slots, &a) {
                out.push(a);
            }
            ControlFlow::Continue(())
        }),
        Backend::Sat => {
            let cnf = encode_sat_from(problem, &enc, symmetry_breaking);
            sat::for_each_model(&cnf, |model| {
                out.push(decode_model(&enc, model, problem.slots.len()));
                ControlFlow::Continue(())
            });
        }
    }
    out.sort();
    out
}

/// Whether any tiling of the problem exists.
pub fn is_tileable(problem: &TilingProblem) -> bool {
    has_exact_cover(&build_exact_cover_matrix(problem).matrix)
}

fn decode_rows(enc: &CoverEncoding, rows: &[usize], n_slots: usize) -> SlotAssignment {
    let mut by_slot: Vec<Option<Placement>> = vec![None; n_slots];
    for &r in rows {
        let (slot, p) = &enc.rows[r];
        by_slot[*slot] = Some(p.clone());
    }
    by_slot
        .into_iter()
        .map(|p| p.expect("every slot is covered"))
        .collect()
}

/// Decode a satisfying assignment (variable `i + 1` = encoding row `i`).
pub fn decode_model(enc: &CoverEncoding, model: &[bool], n_slots: usize) -> SlotAssignment {
    let rows: Vec<usize> = model
        .iter()
        .enumerate()
        .filter(|(_, v)| **v)
        .map(|(i, _)| i)
        .collect();
    decode_rows(enc, &rows, n_slots)
}

/// CNF over one boolean per (slot, placement) row of the cover encoding.
///
/// Clauses: each slot takes at least one and at most one placement,
/// overlapping placements of different slots exclude each other, every
/// region cell is covered, and optionally identical slots are ordered.
pub fn encode_sat(problem: &TilingProblem, symmetry_breaking: bool) -> (Cnf, CoverEncoding) {
    let enc = build_exact_cover_matrix(problem);
    let cnf = encode_sat_from(problem, &enc, symmetry_breaking);
    (cnf, enc)
}

fn encode_sat_from(problem: &TilingProblem, enc: &CoverEncoding, symmetry_breaking: bool) -> Cnf {
    let n = enc.rows.len();
    let var = |i: usize| (i + 1) as Lit;
    let mut cnf = Cnf::new(n);
    for slot in 0..problem.slots.len() {
        let vars: Vec<Lit> = (0..n).filter(|&i| enc.rows[i].0 == slot).map(var).collect();
        cnf.at_least_one(&vars);
        cnf.at_most_one(&vars);
    }
    for a in 0..n {
        for b in a + 1..n {
            let (sa, pa) = &enc.rows[a];
            let (sb, pb) = &enc.rows[b];
            if sa != sb && pa.overlaps(pb) {
                cnf.add_clause([-var(a), -var(b)]);
            }
            if symmetry_breaking
                && sa != sb
                && problem.slots[*sa] == problem.slots[*sb]
                && ((sa < sb) != (pa.order_key() < pb.order_key()))
            {
                cnf.add_clause([-var(a), -var(b)]);
            }
        }
    }
    let n_slots = problem.slots.len();
    for cell in 0..problem.region.len() {
        let covering: Vec<Lit> = (0..n)
            .filter(|&i| enc.matrix.row(i).contains(&(n_slots + cell)))
            .map(var)
            .collect();
        cnf.at_least_one(&covering);
    }
    cnf
}

/// Collapse slot assignments into distinct configurations.
pub fn distinct_configurations(
    width: usize,
    height: usize,
    solutions: &[SlotAssignment],
) -> Vec<TilingConfiguration> {
    let set: BTreeSet<TilingConfiguration> = solutions
        .iter()
        .map(|s| TilingConfiguration::new(width, height, s.clone()))
        .collect();
    set.into_iter().collect()
}

/// Every distinct tiling of the benchmark rectangle, in canonical order; the
/// index is the configuration id.
pub fn enumerate_rect_tilings() -> Vec<TilingConfiguration> {
    let problem = TilingProblem::rectangle(RECT_WIDTH, RECT_HEIGHT, &RECT_PIECES);
    distinct_configurations(
        RECT_WIDTH,
        RECT_HEIGHT,
        &solve_tiling(&problem, Backend::Dlx, true),
    )
}
