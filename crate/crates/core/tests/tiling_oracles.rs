mod common;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::tiling_oracle::*;
use spatial_eval::tiling::{
    distinct_configurations, generate_tiling_dataset, solve_tiling, variants, Backend, PieceKind,
    TilingProblem, RECT_HEIGHT, RECT_PIECES, RECT_WIDTH,
};
use spatial_eval::{Coord, RenderPalette};

#[test]
fn variant_counts_match_exhaustive_orientation_search() {
    for (piece, expected) in [(PieceKind::I, 2), (PieceKind::T, 4), (PieceKind::L, 8)] {
        assert_eq!(orientations(piece).len(), expected);
        let lib: BTreeSet<Shape> = variants(piece)
            .iter()
            .map(|v| {
                v.cells
                    .iter()
                    .map(|c| (c.row as i32, c.col as i32))
                    .collect()
            })
            .collect();
        assert_eq!(lib, orientations(piece).into_iter().collect());
    }
}

#[test]
fn benchmark_rectangle_agrees_across_backtracking_dlx_and_sat() {
    let problem = TilingProblem::rectangle(RECT_WIDTH, RECT_HEIGHT, &RECT_PIECES);
    let dlx = solve_tiling(&problem, Backend::Dlx, true);
    let sat = solve_tiling(&problem, Backend::Sat, true);
    let oracle: BTreeSet<Tiling> =
        backtrack_tilings(&full_region(RECT_WIDTH, RECT_HEIGHT), &RECT_PIECES, None)
            .into_iter()
            .collect();
    assert_eq!(as_tilings(&dlx), oracle);
    assert_eq!(as_tilings(&sat), oracle);
    assert_eq!(dlx.len(), oracle.len());
    assert_eq!(oracle.len(), 32);
    for t in &oracle {
        let covered: Vec<(usize, usize)> = t
            .iter()
            .flat_map(|(_, cells)| cells.iter().copied())
            .collect();
        let unique: BTreeSet<_> = covered.iter().copied().collect();
        assert_eq!(covered.len(), 20);
        assert_eq!(unique, full_region(RECT_WIDTH, RECT_HEIGHT));
    }
}

#[test]
fn random_small_instances_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut nonempty = 0;
    for case in 0..24 {
        let w = rng.gen_range(2..=4usize);
        let h = rng.gen_range(2..=4usize);
        let (pieces, region) = if case % 2 == 0 {
            planted_instance(&mut rng, w.max(3), h)
        } else {
            let n_pieces = rng.gen_range(1..=(w * h / 4).max(1));
            let pieces: Vec<PieceKind> = (0..n_pieces)
                .map(|_| *PieceKind::ALL.choose(&mut rng).unwrap())
                .collect();
            let mut cells: Vec<(usize, usize)> = full_region(w, h).into_iter().collect();
            cells.shuffle(&mut rng);
            (pieces, cells.into_iter().take(4 * n_pieces).collect())
        };
        let w = if case % 2 == 0 { w.max(3) } else { w };
        let problem = TilingProblem::region(
            w,
            h,
            region.iter().map(|&(r, c)| Coord::new(r, c)).collect(),
            &pieces,
        );
        let dlx = solve_tiling(&problem, Backend::Dlx, true);
        let sat = solve_tiling(&problem, Backend::Sat, true);
        let oracle: BTreeSet<Tiling> = backtrack_tilings(&region, &pieces, None)
            .into_iter()
            .collect();
        assert_eq!(as_tilings(&dlx), oracle, "case {case}: {w}x{h} {pieces:?}");
        assert_eq!(as_tilings(&sat), oracle, "case {case}");
        assert_eq!(dlx.len(), oracle.len(), "case {case}: duplicate encodings");
        // symmetry breaking removes duplicate encodings only
        let loose = solve_tiling(&problem, Backend::Dlx, false);
        assert_eq!(
            distinct_configurations(w, h, &loose),
            distinct_configurations(w, h, &dlx),
            "case {case}"
        );
        nonempty += usize::from(!oracle.is_empty());
    }
    assert!(nonempty >= 10, "only {nonempty} tileable random instances");
}

#[test]
fn every_question_has_exactly_one_completable_option() {
    let ds = generate_tiling_dataset(0, &[2, 3]);
    let palette = RenderPalette::ascii();
    let blank = palette.blank.chars().next().unwrap();
    let recs = ds.records(&palette).unwrap();
    let mut per_mask = [0usize; 4];
    let mut violations = Vec::new();
    for r in &recs {
        let hole: BTreeSet<(usize, usize)> = full_region(RECT_WIDTH, RECT_HEIGHT)
            .difference(&glyph_cells(&r.rect_text, blank))
            .copied()
            .collect();
        let completable: Vec<bool> = r
            .offered_variant_texts
            .iter()
            .map(|t| {
                let shape = normalized(
                    glyph_cells(t, blank)
                        .into_iter()
                        .map(|(a, b)| (a as i32, b as i32)),
                );
                !backtrack_tilings(&hole, &r.masked_pieces, Some((r.query_piece, shape))).is_empty()
            })
            .collect();
        if completable.iter().filter(|&&c| c).count() != 1 || !completable[r.gold_index] {
            violations.push(r.id.clone());
        }
        per_mask[r.mask_count] += 1;
    }
    assert!(
        violations.is_empty(),
        "{} violations: {:?}",
        violations.len(),
        violations
    );
    assert!(per_mask[2] >= 300, "{} two-mask questions", per_mask[2]);
    assert!(per_mask[3] >= 150, "{} three-mask questions", per_mask[3]);
}

#[test]
fn masked_pieces_are_of_distinct_types() {
    let ds = generate_tiling_dataset(0, &[2, 3]);
    for q in &ds.instances {
        let kinds: BTreeSet<PieceKind> = q.masked.iter().map(|m| m.piece).collect();
        assert_eq!(kinds.len(), q.mask_count);
        assert_ne!(q.offered[0], q.offered[1]);
    }
}

#[test]
fn dataset_is_reproducible_and_seed_sensitive() {
    let a = generate_tiling_dataset(3, &[2]).instances;
    let b = generate_tiling_dataset(3, &[2]).instances;
    let c = generate_tiling_dataset(4, &[2]).instances;
    assert_eq!(a, b);
    let offered = |v: &[spatial_eval::tiling::TilingQaInstance]| {
        v.iter()
            .map(|q| (q.offered, q.gold_index))
            .collect::<Vec<_>>()
    };
    assert_ne!(offered(&a), offered(&c));
}
