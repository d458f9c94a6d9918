mod common;

use common::fixtures::{all_fixtures, grade, route};
use spatial_eval::trace::analyze_transcript;

#[test]
fn every_fixture_matches_its_label() {
    let fixtures = all_fixtures();
    assert!(fixtures.len() >= 20);
    let mut mismatches = Vec::new();
    for fx in &fixtures {
        let (got, invariant) = grade(fx);
        if got != fx.label {
            mismatches.push(format!(
                "{}: expected {:?}, got {:?}",
                fx.name, fx.label, got
            ));
        }
        assert!(invariant, "{}: accurate but not compliant", fx.name);
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn post_answer_drawings_do_not_count_toward_tracking() {
    let inst = route();
    let raw = "Step 1\nS*#\n#..\n##D\nThe answer is: right, down, right, down\nS.#\n#..\n##*";
    let rec = analyze_transcript(&inst, "vot", raw, true).unwrap();
    assert_eq!((rec.l_v, rec.l_s), (1, 4));
    assert!(rec.partial && !rec.complete);
}
