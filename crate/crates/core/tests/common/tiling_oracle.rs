use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use spatial_eval::tiling::{PieceKind, SlotAssignment};

pub type Shape = BTreeSet<(i32, i32)>;
/// A tiling as a set of (piece, covered cells).
pub type Tiling = BTreeSet<(PieceKind, BTreeSet<(usize, usize)>)>;

pub fn base(piece: PieceKind) -> Vec<(i32, i32)> {
    match piece {
        PieceKind::I => vec![(0, 0), (1, 0), (2, 0), (3, 0)],
        PieceKind::T => vec![(0, 1), (1, 0), (1, 1), (1, 2)],
        PieceKind::L => vec![(0, 1), (1, 1), (2, 1), (2, 0)],
    }
}

pub fn normalized(cells: impl IntoIterator<Item = (i32, i32)>) -> Shape {
    let v: Vec<(i32, i32)> = cells.into_iter().collect();
    let r0 = v.iter().map(|c| c.0).min().unwrap();
    let c0 = v.iter().map(|c| c.1).min().unwrap();
    v.into_iter().map(|(r, c)| (r - r0, c - c0)).collect()
}

/// Every distinct orientation reachable by rotating and mirroring.
pub fn orientations(piece: PieceKind) -> Vec<Shape> {
    let mut out: BTreeSet<Shape> = BTreeSet::new();
    let mut cur = base(piece);
    for _ in 0..4 {
        cur = cur.iter().map(|&(r, c)| (c, -r)).collect();
        out.insert(normalized(cur.clone()));
        out.insert(normalized(cur.iter().map(|&(r, c)| (r, -c))));
    }
    out.into_iter().collect()
}

/// Plain backtracking: cover the first empty cell in row-major order with
/// every remaining piece in every orientation.
pub fn backtrack_tilings(
    region: &BTreeSet<(usize, usize)>,
    pieces: &[PieceKind],
    pinned: Option<(PieceKind, Shape)>,
) -> Vec<Tiling> {
    fn go(
        empty: &mut BTreeSet<(usize, usize)>,
        left: &mut Vec<PieceKind>,
        pinned: &Option<(PieceKind, Shape)>,
        acc: &mut Vec<(PieceKind, BTreeSet<(usize, usize)>)>,
        out: &mut Vec<Tiling>,
    ) {
        let Some(&(fr, fc)) = empty.iter().next() else {
            if left.is_empty() {
                out.push(acc.iter().cloned().collect());
            }
            return;
        };
        let kinds: BTreeSet<PieceKind> = left.iter().copied().collect();
        for kind in kinds {
            let shapes = match pinned {
                Some((p, s)) if *p == kind => vec![s.clone()],
                _ => orientations(kind),
            };
            for shape in shapes {
                // the shape's first cell in row-major order lands on (fr, fc)
                let &(sr, sc) = shape.iter().next().unwrap();
                let cells: Option<BTreeSet<(usize, usize)>> = shape
                    .iter()
                    .map(|&(r, c)| {
                        let rr = fr as i32 + r - sr;
                        let cc = fc as i32 + c - sc;
                        (rr >= 0 && cc >= 0).then_some((rr as usize, cc as usize))
                    })
                    .collect();
                let Some(cells) = cells else { continue };
                if !cells.iter().all(|c| empty.contains(c)) {
                    continue;
                }
                let i = left.iter().position(|&k| k == kind).unwrap();
                left.remove(i);
                for c in &cells {
                    empty.remove(c);
                }
                acc.push((kind, cells.clone()));
                go(empty, left, pinned, acc, out);
                acc.pop();
                empty.extend(cells.iter().copied());
                left.insert(i, kind);
            }
        }
    }
    let mut out = Vec::new();
    go(
        &mut region.clone(),
        &mut pieces.to_vec(),
        &pinned,
        &mut Vec::new(),
        &mut out,
    );
    out
}

pub fn as_tilings(solutions: &[SlotAssignment]) -> BTreeSet<Tiling> {
    solutions
        .iter()
        .map(|s| {
            s.iter()
                .map(|p| (p.piece, p.cells.iter().map(|c| (c.row, c.col)).collect()))
                .collect()
        })
        .collect()
}

pub fn full_region(w: usize, h: usize) -> BTreeSet<(usize, usize)> {
    (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect()
}

/// Drop random non-overlapping placements onto a `w`×`h` board; the covered
/// cells form a region that is tileable by construction.
pub fn planted_instance(
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
) -> (Vec<PieceKind>, BTreeSet<(usize, usize)>) {
    let mut region = BTreeSet::new();
    let mut pieces = Vec::new();
    for _ in 0..40 {
        let kind = *PieceKind::ALL.choose(rng).unwrap();
        let shape = orientations(kind).choose(rng).unwrap().clone();
        let (r0, c0) = (rng.gen_range(0..h), rng.gen_range(0..w));
        let cells: BTreeSet<(usize, usize)> = shape
            .iter()
            .map(|&(r, c)| (r0 + r as usize, c0 + c as usize))
            .collect();
        if cells
            .iter()
            .all(|&(r, c)| r < h && c < w && !region.contains(&(r, c)))
        {
            region.extend(cells);
            pieces.push(kind);
        }
    }
    if pieces.is_empty() {
        pieces.push(PieceKind::T);
        region = [(0, 0), (0, 1), (0, 2), (1, 1)].into_iter().collect();
    }
    (pieces, region)
}

pub fn glyph_cells(text: &str, blank: char) -> BTreeSet<(usize, usize)> {
    text.lines()
        .enumerate()
        .flat_map(|(r, l)| {
            l.chars()
                .enumerate()
                .filter(move |(_, ch)| *ch != blank)
                .map(move |(c, _)| (r, c))
        })
        .collect()
}
