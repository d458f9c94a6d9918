use std::collections::HashMap;

use spatial_eval::answer::{AnswerJudgment, ExtractionRule};
use spatial_eval::config::ProviderConfig;
use spatial_eval::dataset::{Instance, TaskKind};
use spatial_eval::harness::{
    run_suite, PromptSetting, Provider, ProviderError, RunDir, RunOptions,
};
use spatial_eval::nav::{NavQaRecord, NavTask};
use spatial_eval::report::{read_analysis, write_analysis, write_scores};
use spatial_eval::sim::{
    aggregate_answers, aggregate_progress, aggregate_routes, execute_instructions,
};
use spatial_eval::trace::{parse_transcript, tracking_rates};
use spatial_eval::Direction::*;

const MAP: &str = "S.#\n#..\n##D";
const STEPS: [&str; 4] = [
    "S*#\n#..\n##D",
    "S.#\n#*.\n##D",
    "S.#\n#.*\n##D",
    "S.#\n#..\n##*",
];
const GOLD: &str = "The answer is: right, down, right, down";

fn route(id: &str) -> Instance {
    Instance::Nav(NavQaRecord {
        id: id.into(),
        task: NavTask::RoutePlanning,
        k: 4,
        config_id: 0,
        map_text: MAP.into(),
        given_instructions: vec![],
        gold: vec![Right, Down, Right, Down],
        palette_id: "ascii".into(),
    })
}

/// `steps` drawings, each under its own heading, followed by `answer`.
fn transcript(steps: usize, answer: &str) -> String {
    let mut s = String::new();
    for (i, grid) in STEPS.iter().take(steps).enumerate() {
        s.push_str(&format!("Step {}:\n{grid}\n", i + 1));
    }
    s + answer
}

fn judgment(correct: bool) -> AnswerJudgment {
    AnswerJudgment {
        extracted_answer: String::new(),
        rule: ExtractionRule::Marker,
        correct,
    }
}

#[test]
fn completing_and_success_rates() {
    let map = match route("r") {
        Instance::Nav(r) => r.map().unwrap(),
        _ => unreachable!(),
    };
    let traces = [
        execute_instructions(&map, &[Right, Down, Right, Down]),
        execute_instructions(&map, &[Right, Down]),
    ];
    let m = aggregate_routes(&traces).unwrap();
    assert_eq!((m.n, m.completing_rate, m.success_rate), (2, 75.0, 50.0));
    // an ignored instruction does not advance t
    let detour = execute_instructions(&map, &[Right, Up, Down, Right, Down]);
    assert_eq!((detour.t, detour.k, detour.reached_dest), (4, 4, true));
    let m = aggregate_progress(&[(1, 3), (2, 3), (3, 3)]).unwrap();
    assert_eq!((m.completing_rate, m.success_rate), (66.67, 33.33));
    assert!(aggregate_progress(&[]).is_err());
}

#[test]
fn accuracy_is_an_exact_ratio() {
    let cases: [(&[bool], usize, f64); 4] = [
        (&[true, true, true, false], 3, 75.0),
        (&[true, false, false], 1, 33.33),
        (&[false, true, true], 2, 66.67),
        (&[true; 7], 7, 100.0),
    ];
    for (flags, correct, pct) in cases {
        let js: Vec<AnswerJudgment> = flags.iter().map(|&c| judgment(c)).collect();
        let m = aggregate_answers(&js).unwrap();
        assert_eq!((m.n, m.correct, m.accuracy), (flags.len(), correct, pct));
    }
    assert!(aggregate_answers(&[]).is_err());
}

#[test]
fn tracking_lengths_from_transcripts() {
    let inst = route("r");
    for (steps, l_v) in [(0, 0), (1, 1), (2, 2), (4, 4)] {
        let tr = parse_transcript(&transcript(steps, GOLD), &inst).unwrap();
        assert_eq!((tr.l_v, tr.l_s), (l_v, 4), "{steps} drawings");
        assert_eq!(tr.complete(), l_v == 4);
        assert_eq!(tr.partial(), l_v > 0);
    }
    let rates = tracking_rates(&[(4, 4), (2, 4), (0, 4), (4, 4)]).unwrap();
    assert_eq!((rates.n, rates.complete, rates.partial), (4, 50.0, 75.0));
    let rates = tracking_rates(&[(1, 3), (0, 2), (0, 5)]).unwrap();
    assert_eq!((rates.complete, rates.partial), (0.0, 33.33));
}

/// Serves a fixed transcript per instance id.
struct Scripted(HashMap<String, String>);

impl Provider for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(
        &self,
        instance: &Instance,
        _: &spatial_eval::harness::ChatPayload,
    ) -> Result<String, ProviderError> {
        Ok(self.0[instance.id()].clone())
    }
}

#[test]
fn analyze_over_a_scripted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = RunDir::new(tmp.path().join("run"));
    let script = [
        ("a", transcript(4, GOLD)),
        ("b", transcript(2, GOLD)),
        ("c", transcript(0, "The answer is: right, down")),
        ("d", transcript(4, GOLD)),
    ];
    let instances: Vec<Instance> = script.iter().map(|(id, _)| route(id)).collect();
    let provider = Scripted(
        script
            .iter()
            .map(|(id, t)| (id.to_string(), t.clone()))
            .collect(),
    );
    let mut opts = RunOptions::new(ProviderConfig::default(), vec![PromptSetting::Vot]);
    // every prompt is identical, so the cache would replay the first answer
    opts.cache = false;
    let summary = run_suite(&dir, &instances, &provider, &opts).unwrap();
    assert_eq!((summary.executed, summary.failed), (4, 0));

    let scores = write_scores(&dir).unwrap();
    let route = scores.settings[0].route_planning.unwrap();
    assert_eq!(
        (route.n, route.completing_rate, route.success_rate),
        (4, 87.5, 75.0)
    );

    let (tracking, capability) = write_analysis(&dir).unwrap();
    assert_eq!(tracking.len(), 1);
    let row = &tracking[0];
    assert_eq!(
        (row.task, row.setting.as_str(), row.n),
        (TaskKind::RoutePlanning, "vot", 4)
    );
    assert_eq!((row.complete, row.partial), (50.0, 75.0));

    assert_eq!(capability.len(), 1);
    let cap = &capability[0];
    assert_eq!(
        (cap.family.as_str(), cap.n, cap.graded),
        ("Visual Navigation", 4, 3)
    );
    assert_eq!(cap.compliance, Some(100.0));
    assert_eq!(cap.accuracy, Some(66.67));
    assert_eq!(cap.understanding, Some(100.0));

    let records = read_analysis(&dir).unwrap();
    let lv: Vec<(String, usize)> = records.iter().map(|r| (r.id.clone(), r.l_v)).collect();
    assert_eq!(
        lv,
        [
            ("a".into(), 4),
            ("b".into(), 2),
            ("c".into(), 0),
            ("d".into(), 4)
        ]
    );
    let csv = std::fs::read_to_string(dir.scores_dir().join("tracking.csv")).unwrap();
    assert!(csv.contains("route_planning,vot,4,50.00,75.00"), "{csv}");
}
