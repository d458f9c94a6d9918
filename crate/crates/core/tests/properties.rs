use proptest::prelude::*;

use spatial_eval::answer::{score_answer, AnswerJudgment, ExtractionRule};
use spatial_eval::grid::{parse_grid, render_grid};
use spatial_eval::nav::{render_nav_map, simulate_plan};
use spatial_eval::nlnav::{normalize_ring, RingMove};
use spatial_eval::sim::{aggregate_answers, aggregate_progress, execute_instructions};
use spatial_eval::trace::tracking_rates;
use spatial_eval::{Direction, GridMap, RenderPalette};

/// Axis-alternating direction sequences of length 1..=7.
fn alternating_dirs() -> impl Strategy<Value = Vec<Direction>> {
    (0..4usize, prop::collection::vec(any::<bool>(), 0..7)).prop_map(|(first, turns)| {
        let mut dirs = vec![Direction::ALL[first]];
        for t in turns {
            let [a, b] = dirs.last().unwrap().perpendicular();
            dirs.push(if t { a } else { b });
        }
        dirs
    })
}

fn random_map() -> impl Strategy<Value = GridMap> {
    alternating_dirs().prop_filter_map("overlap unresolved", |dirs| {
        let plan = simulate_plan(&dirs)?;
        Some(render_nav_map(0, plan).ok()?.map)
    })
}

fn palette() -> impl Strategy<Value = RenderPalette> {
    prop_oneof![Just(RenderPalette::ascii()), Just(RenderPalette::emoji())]
}

fn ring_move() -> impl Strategy<Value = RingMove> {
    (any::<bool>(), 1..40u32).prop_map(|(cw, n)| {
        if cw {
            RingMove::cw(n)
        } else {
            RingMove::ccw(n)
        }
    })
}

proptest! {
    #[test]
    fn grid_round_trip(map in random_map(), p in palette()) {
        let text = render_grid(&map, &p).unwrap();
        let back = parse_grid(&text, &p).unwrap().into_map().unwrap();
        prop_assert_eq!(&back, &map);
        prop_assert_eq!(render_grid(&back, &p).unwrap(), text);
    }

    #[test]
    fn parsing_ignores_spacing_and_variation_selectors(map in random_map(), p in palette(), sep in prop_oneof![Just(""), Just(" "), Just("\u{FE0F}"), Just("\u{FE0F} ")]) {
        let text: String = (0..map.height())
            .map(|r| {
                (0..map.width())
                    .map(|c| p.glyph(map.get(spatial_eval::Coord::new(r, c)).unwrap()).to_string())
                    .collect::<Vec<_>>()
                    .join(sep)
            })
            .collect::<Vec<_>>()
            .join("\n");
        let back = parse_grid(&text, &p).unwrap().into_map().unwrap();
        prop_assert_eq!(back, map);
    }

    #[test]
    fn execution_never_enters_obstacles(map in random_map(), dirs in prop::collection::vec(0..4usize, 0..12)) {
        let dirs: Vec<Direction> = dirs.into_iter().map(|i| Direction::ALL[i]).collect();
        let tr = execute_instructions(&map, &dirs);
        prop_assert!(tr.t <= tr.k);
        prop_assert_eq!(tr.executed.len() + tr.ignored.len(), dirs.len());
        for (_, c) in &tr.executed {
            prop_assert!(map.is_passable(*c));
        }
        prop_assert_eq!(tr.reached_dest, tr.t == tr.k);
    }

    #[test]
    fn answer_extraction_is_suffix_stable(
        gold in prop_oneof![Just("up"), Just("left, down"), Just("Option 2"), Just("infant bed")],
        prefix in "[a-z ,.\n]{0,60}",
        suffix in "[a-z ,.]{0,40}",
    ) {
        prop_assume!(!suffix.contains("answer") && !prefix.contains("answer"));
        let raw = format!("{prefix}\nThe answer is: {gold}");
        let base = score_answer(&raw, gold);
        let extended = score_answer(&format!("{raw}\n{suffix}"), gold);
        prop_assert_eq!(base.rule, ExtractionRule::Marker);
        prop_assert!(base.correct);
        prop_assert_eq!(base, extended);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_residue_survives_canceling_pairs(
        size in 2..30usize,
        moves in prop::collection::vec(ring_move(), 0..8),
        pairs in prop::collection::vec((1..50u32, any::<bool>()), 1..6),
    ) {
        let before = normalize_ring(&moves, size);
        let mut extended = moves.clone();
        for (n, cw_first) in pairs {
            if cw_first {
                extended.extend([RingMove::cw(n), RingMove::ccw(n)]);
            } else {
                extended.extend([RingMove::ccw(n), RingMove::cw(n)]);
            }
        }
        prop_assert_eq!(normalize_ring(&extended, size), before);
        prop_assert!(before < size);
    }
}

proptest! {
    #[test]
    fn aggregation_is_permutation_invariant(
        items in prop::collection::vec((0..8usize, 1..8usize, any::<bool>(), 0..8usize), 1..40)
            .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()))
    ) {
        let (items, shuffled) = items;
        let progress = |v: &[(usize, usize, bool, usize)]| v.iter().map(|&(t, k, _, _)| (t.min(k), k)).collect::<Vec<_>>();
        let judgments = |v: &[(usize, usize, bool, usize)]| {
            v.iter()
                .map(|&(_, _, correct, _)| AnswerJudgment {
                    extracted_answer: String::new(),
                    rule: ExtractionRule::Marker,
                    correct,
                })
                .collect::<Vec<_>>()
        };
        let lengths = |v: &[(usize, usize, bool, usize)]| v.iter().map(|&(_, k, _, lv)| (lv, k)).collect::<Vec<_>>();
        prop_assert_eq!(aggregate_progress(&progress(&items)).unwrap(), aggregate_progress(&progress(&shuffled)).unwrap());
        prop_assert_eq!(aggregate_answers(&judgments(&items)).unwrap(), aggregate_answers(&judgments(&shuffled)).unwrap());
        prop_assert_eq!(tracking_rates(&lengths(&items)).unwrap(), tracking_rates(&lengths(&shuffled)).unwrap());
    }
}

#[test]
fn ring_example_from_the_formula() {
    assert_eq!(normalize_ring(&[RingMove::cw(15), RingMove::ccw(3)], 12), 0);
    assert_eq!(normalize_ring(&[RingMove::ccw(1)], 12), 11);
}
