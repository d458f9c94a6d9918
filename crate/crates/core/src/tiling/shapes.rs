use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::Coord;

/// Tetromino shapes used by the tiling task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PieceKind {
    I,
    T,
    L,
}

impl PieceKind {
    pub const ALL: [PieceKind; 3] = [PieceKind::I, PieceKind::T, PieceKind::L];

    /// Position in [`PieceKind::ALL`]; also the palette glyph index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PieceKind::I => "I",
            PieceKind::T => "T",
            PieceKind::L => "L",
        }
    }

    /// Canonical cells, normalized so min row = min col = 0.
    pub fn base_cells(self) -> [(i32, i32); 4] {
        match self {
            PieceKind::I => [(0, 0), (0, 1), (0, 2), (0, 3)],
            PieceKind::T => [(0, 0), (0, 1), (0, 2), (1, 1)],
            PieceKind::L => [(0, 0), (1, 0), (2, 0), (2, 1)],
        }
    }
}

impl fmt::Display for PieceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PieceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "I" | "i" => Ok(PieceKind::I),
            "T" | "t" => Ok(PieceKind::T),
            "L" | "l" => Ok(PieceKind::L),
            other => Err(format!("unknown piece `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transform {
    /// Clockwise quarter turns, 0..=3.
    pub quarter_turns: u8,
    /// Mirror left-right before rotating.
    pub reflected: bool,
}

impl Transform {
    fn apply(self, (r, c): (i32, i32)) -> (i32, i32) {
        let (mut r, mut c) = if self.reflected { (r, -c) } else { (r, c) };
        for _ in 0..self.quarter_turns {
            (r, c) = (c, -r);
        }
        (r, c)
    }
}

/// A rotation/reflection image of a piece, normalized to the origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variant {
    pub piece: PieceKind,
    pub index: usize,
    pub transform: Transform,
    /// Sorted, normalized cells.
    pub cells: Vec<Coord>,
}

impl Variant {
    pub fn height(&self) -> usize {
        self.cells.iter().map(|c| c.row).max().unwrap_or(0) + 1
    }

    pub fn width(&self) -> usize {
        self.cells.iter().map(|c| c.col).max().unwrap_or(0) + 1
    }
}

pub(crate) fn normalize(cells: impl IntoIterator<Item = (i32, i32)>) -> Vec<Coord> {
    let cells: Vec<(i32, i32)> = cells.into_iter().collect();
    let min_r = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let min_c = cells.iter().map(|c| c.1).min().unwrap_or(0);
    let set: BTreeSet<Coord> = cells
        .iter()
        .map(|&(r, c)| Coord::new((r - min_r) as usize, (c - min_c) as usize))
        .collect();
    set.into_iter().collect()
}

/// Distinct variants of `piece`, in first-seen order over
/// (unreflected, reflected) × (0, 90, 180, 270 degrees).
pub fn variants(piece: PieceKind) -> Vec<Variant> {
    let mut out: Vec<Variant> = Vec::new();
    for reflected in [false, true] {
        for quarter_turns in 0..4 {
            let transform = Transform {
                quarter_turns,
                reflected,
            };
            let cells = normalize(piece.base_cells().map(|p| transform.apply(p)));
            if out.iter().all(|v| v.cells != cells) {
                out.push(Variant {
                    piece,
                    index: out.len(),
                    transform,
                    cells,
                });
            }
        }
    }
    out
}

/// Index of the variant whose normalized shape matches `cells`.
pub fn variant_index_of(piece: PieceKind, cells: &[Coord]) -> Option<usize> {
    let shape = normalize(cells.iter().map(|c| (c.row as i32, c.col as i32)));
    variants(piece)
        .into_iter()
        .find(|v| v.cells == shape)
        .map(|v| v.index)
}

/// A variant anchored inside a rectangle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub piece: PieceKind,
    pub variant: usize,
    /// Top-left corner of the variant's bounding box.
    pub anchor: Coord,
    /// Sorted covered cells.
    pub cells: Vec<Coord>,
}

impl Placement {
    /// Ordering key used for canonical slot assignment of identical pieces.
    pub fn order_key(&self) -> (Coord, &[Coord]) {
        (self.anchor, &self.cells)
    }

    pub fn overlaps(&self, other: &Placement) -> bool {
        self.cells.iter().any(|c| other.cells.contains(c))
    }
}

/// Every in-bounds placement of `piece` in a `width`×`height` rectangle,
/// ordered by variant, then anchor row, then anchor column.
pub fn legal_placements(piece: PieceKind, width: usize, height: usize) -> Vec<Placement> {
    let mut out = Vec::new();
    for v in variants(piece) {
        if v.height() > height || v.width() > width {
            continue;
        }
        for r in 0..=height - v.height() {
            for c in 0..=width - v.width() {
                out.push(Placement {
                    piece,
                    variant: v.index,
                    anchor: Coord::new(r, c),
                    cells: v
                        .cells
                        .iter()
                        .map(|x| Coord::new(x.row + r, x.col + c))
                        .collect(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_counts() {
        assert_eq!(variants(PieceKind::I).len(), 2);
        assert_eq!(variants(PieceKind::T).len(), 4);
        assert_eq!(variants(PieceKind::L).len(), 8);
    }

    #[test]
    fn variants_are_connected_tetrominoes() {
        for p in PieceKind::ALL {
            for v in variants(p) {
                assert_eq!(v.cells.len(), 4);
                assert_eq!(v.cells.iter().map(|c| c.row).min(), Some(0));
                assert_eq!(v.cells.iter().map(|c| c.col).min(), Some(0));
                // every cell has a 4-neighbour in the piece
                for c in &v.cells {
                    assert!(v
                        .cells
                        .iter()
                        .any(|o| c.row.abs_diff(o.row) + c.col.abs_diff(o.col) == 1));
                }
            }
        }
    }

    #[test]
    fn variant_index_round_trip() {
        for p in PieceKind::ALL {
            for v in variants(p) {
                let shifted: Vec<Coord> = v
                    .cells
                    .iter()
                    .map(|c| Coord::new(c.row + 2, c.col + 1))
                    .collect();
                assert_eq!(variant_index_of(p, &shifted), Some(v.index));
            }
        }
        let square = [
            Coord::new(0, 0),
            Coord::new(0, 1),
            Coord::new(1, 0),
            Coord::new(1, 1),
        ];
        assert_eq!(variant_index_of(PieceKind::L, &square), None);
    }

    #[test]
    fn placements_stay_in_bounds() {
        let ps = legal_placements(PieceKind::I, 4, 1);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].anchor, Coord::new(0, 0));
        for p in legal_placements(PieceKind::L, 5, 4) {
            assert!(p.cells.iter().all(|c| c.row < 4 && c.col < 5));
        }
    }
}
