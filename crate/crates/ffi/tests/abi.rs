use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use spatial_eval_ffi::*;

const MAP: &str = "S.\n#D";

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = se_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    se_string_free(p);
    s
}

fn parse(text: &str) -> *mut SeGrid {
    let mut g = ptr::null_mut();
    let text = cstr(text);
    assert_eq!(
        unsafe { se_grid_parse(text.as_ptr(), ptr::null(), &mut g) },
        SeStatus::Ok
    );
    g
}

#[test]
fn grid_round_trip_and_dimensions() {
    let g = parse(MAP);
    unsafe {
        assert_eq!(se_grid_width(g), 2);
        assert_eq!(se_grid_height(g), 2);
        let mut out = ptr::null_mut();
        assert_eq!(se_grid_render(g, ptr::null(), &mut out), SeStatus::Ok);
        assert_eq!(take(out), MAP);
        se_grid_free(g);
        assert_eq!(se_grid_width(ptr::null()), 0);
    }
}

#[test]
fn execution_reports_progress() {
    let g = parse(MAP);
    let (mut t, mut k, mut reached) = (0usize, 0usize, false);
    unsafe {
        let gold = cstr("right, down");
        assert_eq!(
            se_grid_execute(g, gold.as_ptr(), &mut t, &mut k, &mut reached),
            SeStatus::Ok
        );
        assert_eq!((t, k, reached), (2, 2, true));
        let partial = cstr("right, up");
        assert_eq!(
            se_grid_execute(g, partial.as_ptr(), &mut t, &mut k, &mut reached),
            SeStatus::Ok
        );
        assert_eq!((t, k, reached), (1, 2, false));
        se_grid_free(g);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(
            se_grid_parse(ptr::null(), ptr::null(), &mut g),
            SeStatus::NullArgument
        );
        assert!(last_error().contains("text"));
        let bad = cstr("S.\n...");
        assert_eq!(
            se_grid_parse(bad.as_ptr(), ptr::null(), &mut g),
            SeStatus::ParseError
        );
        assert!(g.is_null());
        let text = cstr(MAP);
        let palette = cstr("neon");
        assert_eq!(
            se_grid_parse(text.as_ptr(), palette.as_ptr(), &mut g),
            SeStatus::InvalidArgument
        );
        let mut out = ptr::null_mut();
        assert_eq!(
            se_nav_generate_jsonl(1, 3, ptr::null(), &mut out),
            SeStatus::InvalidArgument
        );
        assert!(out.is_null());
        // success clears the message
        let mut n = 0usize;
        assert_eq!(se_tiling_solution_count(&mut n), SeStatus::Ok);
        assert!(se_last_error_message().is_null());
        se_string_free(ptr::null_mut());
        se_grid_free(ptr::null_mut());
    }
}

#[test]
fn nav_jsonl_counts() {
    let mut out = ptr::null_mut();
    let text = unsafe {
        assert_eq!(
            se_nav_generate_jsonl(2, 3, ptr::null(), &mut out),
            SeStatus::Ok
        );
        take(out)
    };
    let lines: Vec<&str> = text.lines().collect();
    // 8 + 16 maps, each with one route question and k - 1 next-step questions
    assert_eq!(lines.len(), 8 * 2 + 16 * 3);
    assert!(lines
        .iter()
        .all(|l| l.starts_with('{') && l.contains("\"palette_id\":\"ascii\"")));
}

#[test]
fn answer_scoring() {
    let (raw, gold) = (
        cstr("Let me think.\nThe answer is: left, up"),
        cstr("left, up"),
    );
    let mut correct = false;
    unsafe {
        assert_eq!(
            se_score_answer(raw.as_ptr(), gold.as_ptr(), &mut correct),
            SeStatus::Ok
        );
        assert!(correct);
        let wrong = cstr("up, left");
        assert_eq!(
            se_score_answer(raw.as_ptr(), wrong.as_ptr(), &mut correct),
            SeStatus::Ok
        );
        assert!(!correct);
    }
}

#[test]
fn tiling_count_and_viz_count() {
    let mut n = 0usize;
    unsafe {
        assert_eq!(se_tiling_solution_count(&mut n), SeStatus::Ok);
        assert_eq!(n, 32);
        let raw = cstr("Step 1\nS*.\n##.\n..D\nStep 2\nS..\n##*\n..D\nThe answer is: right, down\nS..\n##.\n..*");
        assert_eq!(
            se_transcript_viz_count(raw.as_ptr(), ptr::null(), &mut n),
            SeStatus::Ok
        );
        assert_eq!(n, 2);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("include/spatial_eval.h"),
    )
    .unwrap();
    for name in [
        "se_last_error_message",
        "se_string_free",
        "se_grid_parse",
        "se_grid_free",
        "se_grid_width",
        "se_grid_height",
        "se_grid_render",
        "se_grid_execute",
        "se_nav_generate_jsonl",
        "se_score_answer",
        "se_tiling_solution_count",
        "se_transcript_viz_count",
        "SE_STATUS_OK",
        "typedef struct SeGrid SeGrid",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", "-"])
        .arg(format!("-I{}", include.display()))
        .stdin(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child
                .stdin
                .take()
                .unwrap()
                .write_all(b"#include \"spatial_eval.h\"\nint main(void) { size_t n; return se_tiling_solution_count(&n) == SE_STATUS_OK ? 0 : 1; }\n")?;
            child.wait()
        })
    else {
        eprintln!("no C compiler available; skipped");
        return;
    };
    assert!(status.success());
}
