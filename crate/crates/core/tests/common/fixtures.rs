use spatial_eval::dataset::Instance;
use spatial_eval::harness::PromptSetting;
use spatial_eval::nav::{NavQaRecord, NavTask};
use spatial_eval::report::score_instance;
use spatial_eval::tiling::{generate_tiling_dataset, TilingQaRecord};
use spatial_eval::trace::{analyze_transcript, VizTag};
use spatial_eval::Direction::*;
use spatial_eval::RenderPalette;

/// Path S(0,0) → (0,1) → (1,1) → (1,2) → D(2,2): right, down, right, down.
pub const MAP: &str = "S.#\n#..\n##D";

pub fn route() -> Instance {
    Instance::Nav(NavQaRecord {
        id: "fixture-route".into(),
        task: NavTask::RoutePlanning,
        k: 4,
        config_id: 0,
        map_text: MAP.into(),
        given_instructions: vec![],
        gold: vec![Right, Down, Right, Down],
        palette_id: "ascii".into(),
    })
}

pub fn next_step() -> Instance {
    Instance::Nav(NavQaRecord {
        id: "fixture-next".into(),
        task: NavTask::NextStep,
        k: 4,
        config_id: 0,
        map_text: MAP.into(),
        given_instructions: vec![Right, Down],
        gold: vec![Right],
        palette_id: "ascii".into(),
    })
}

pub fn tiling_record() -> TilingQaRecord {
    generate_tiling_dataset(0, &[2])
        .records(&RenderPalette::ascii())
        .unwrap()
        .remove(0)
}

/// Expected grade: `None` when nothing is graded, else (compliant, accurate, tag).
pub type Label = Option<(bool, bool, Option<VizTag>)>;

pub struct Fixture {
    pub name: &'static str,
    pub instance: Instance,
    pub transcript: String,
    pub label: Label,
}

pub fn nav_fixtures() -> Vec<Fixture> {
    let gold = "The answer is: right, down, right, down";
    let f = |name, instance: Instance, body: &str, label: Label| Fixture {
        name,
        instance,
        transcript: body.to_string(),
        label,
    };
    vec![
        f(
            "route_final_position",
            route(),
            &format!("Step 4:\nS.#\n#..\n##*\n{gold}"),
            Some((true, true, None)),
        ),
        f(
            "route_full_trail",
            route(),
            &format!("S*#\n#**\n##*\n{gold}"),
            Some((true, true, None)),
        ),
        f(
            "route_trail_reaching_dest",
            route(),
            &format!("S*#\n#**\n##D\n{gold}"),
            Some((true, true, None)),
        ),
        f(
            "route_stuck_midway",
            route(),
            &format!("S.#\n#*.\n##D\n{gold}"),
            Some((true, false, None)),
        ),
        f(
            "route_mark_on_obstacle",
            route(),
            &format!("S.*\n#..\n##D\n{gold}"),
            Some((false, false, Some(VizTag::Obstacle))),
        ),
        f(
            "route_road_drawn_as_obstacle",
            route(),
            &format!("S##\n#..\n##D\n{gold}"),
            Some((true, false, None)),
        ),
        f(
            "route_wrong_dimensions",
            route(),
            &format!("S.\n#*\n{gold}"),
            Some((false, false, Some(VizTag::DimensionMismatch))),
        ),
        f(
            "route_unparseable",
            route(),
            &format!("**#\n***\n***\n{gold}"),
            Some((false, false, Some(VizTag::Unparseable))),
        ),
        f(
            "route_viz_only_after_answer",
            route(),
            &format!("{gold}\nS.#\n#..\n##*"),
            None,
        ),
        f(
            "route_last_viz_before_answer_counts",
            route(),
            &format!("S.*\n#..\n##D\n{gold}\nS.#\n#..\n##*"),
            Some((false, false, Some(VizTag::Obstacle))),
        ),
        f("route_no_viz", route(), gold, None),
        f(
            "route_accurate_viz_wrong_answer",
            route(),
            "S.#\n#..\n##*\nThe answer is: left, up",
            Some((true, true, Some(VizTag::Inconsistent))),
        ),
        f(
            "next_before_move",
            next_step(),
            "S.#\n#*.\n##D\nThe answer is: right",
            Some((true, true, None)),
        ),
        f(
            "next_after_move",
            next_step(),
            "S.#\n#.*\n##D\nThe answer is: right",
            Some((true, true, None)),
        ),
        f(
            "next_jumped_to_dest",
            next_step(),
            "S.#\n#..\n##*\nThe answer is: right",
            Some((true, false, None)),
        ),
    ]
}

pub fn set(rows: &mut [Vec<char>], cells: &[(usize, usize)], ch: char) {
    for &(r, c) in cells {
        rows[r][c] = ch;
    }
}

pub fn join(rows: &[Vec<char>]) -> String {
    rows.iter()
        .map(|r| r.iter().collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn tiling_fixtures() -> Vec<Fixture> {
    let rec = tiling_record();
    let answer = format!("The answer is: {}", rec.gold);
    let rect: Vec<Vec<char>> = rec.rect_text.lines().map(|l| l.chars().collect()).collect();
    let solution: Vec<Vec<char>> = rec
        .solution_text
        .lines()
        .map(|l| l.chars().collect())
        .collect();
    let query: Vec<(usize, usize)> = rec.query_cells.iter().map(|c| (c.row, c.col)).collect();
    let qglyph = rec.query_piece.name().chars().next().unwrap();
    let fixed = (0..4)
        .flat_map(|r| (0..5).map(move |c| (r, c)))
        .find(|&(r, c)| rect[r][c] != '-')
        .unwrap();
    let other_glyph = ['I', 'T', 'L']
        .into_iter()
        .find(|&g| g != rect[fixed.0][fixed.1])
        .unwrap();

    let mut only_query = rect.clone();
    set(&mut only_query, &query, qglyph);
    let mut overlap = solution.clone();
    set(&mut overlap, &[fixed], other_glyph);
    let mut erased = solution.clone();
    set(&mut erased, &[fixed], '-');
    let mut wrong = solution.clone();
    set(&mut wrong, &query, '-');

    let inst = || Instance::Tiling(rec.clone());
    let f = |name, grid: String, label: Label| Fixture {
        name,
        instance: inst(),
        transcript: format!("Placing pieces:\n{grid}\n{answer}"),
        label,
    };
    vec![
        f(
            "tiling_gold_solution",
            rec.solution_text.clone(),
            Some((true, true, None)),
        ),
        f(
            "tiling_query_piece_only",
            join(&only_query),
            Some((true, true, None)),
        ),
        f(
            "tiling_overlaps_fixed_piece",
            join(&overlap),
            Some((false, false, Some(VizTag::Overlap))),
        ),
        f(
            "tiling_erases_fixed_piece",
            join(&erased),
            Some((false, false, Some(VizTag::Overlap))),
        ),
        f(
            "tiling_query_left_empty",
            join(&wrong),
            Some((true, false, None)),
        ),
        f(
            "tiling_unparseable",
            "12*4I\n*1234\n12*4X\n1234*".into(),
            Some((false, false, Some(VizTag::Unparseable))),
        ),
    ]
}

/// Grade a fixture through scoring and analysis; returns the observed label
/// and whether accurate ⇒ compliant held.
pub fn grade(fx: &Fixture) -> (Label, bool) {
    let correct = score_instance(&fx.instance, PromptSetting::Vot, &fx.transcript)
        .unwrap()
        .correct;
    let rec = analyze_transcript(&fx.instance, "vot", &fx.transcript, correct).unwrap();
    let got = rec.compliant.map(|compliant| {
        (
            compliant,
            rec.accurate.unwrap(),
            rec.reasons.first().copied(),
        )
    });
    let invariant = !(rec.accurate == Some(true) && rec.compliant != Some(true));
    (got, invariant)
}

pub fn all_fixtures() -> Vec<Fixture> {
    nav_fixtures()
        .into_iter()
        .chain(tiling_fixtures())
        .collect()
}
