//! C ABI over the `spatial-eval` library.
//!
//! Every fallible call returns a [`SeStatus`]; on failure the message is
//! available from [`se_last_error_message`] on the same thread. Strings
//! handed out by this library must be released with [`se_string_free`],
//! grids with [`se_grid_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spatial_eval::answer::{parse_directions, score_answer};
use spatial_eval::grid::{parse_grid, render_grid};
use spatial_eval::nav::generate_nav_dataset;
use spatial_eval::sim::execute_instructions;
use spatial_eval::tiling::{
    solve_tiling, Backend, TilingProblem, RECT_HEIGHT, RECT_PIECES, RECT_WIDTH,
};
use spatial_eval::trace::parse_transcript_with;
use spatial_eval::{GridMap, RenderPalette};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ParseError = 4,
    Panic = 5,
}

/// Opaque navigation map.
pub struct SeGrid {
    map: GridMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(SeStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: SeStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

/// Run `f`, turning errors and panics into a status plus last-error message.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> SeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(SeStatus::NullArgument, format!("`{name}` is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| {
        fail(
            SeStatus::InvalidUtf8,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

unsafe fn palette_arg(p: *const c_char) -> FfiResult<RenderPalette> {
    if p.is_null() {
        return Ok(RenderPalette::ascii());
    }
    let id = str_arg(p, "palette")?;
    RenderPalette::by_id(id).or_else(|e| fail(SeStatus::InvalidArgument, e.to_string()))
}

unsafe fn write_out<T>(out: *mut T, v: T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        return fail(SeStatus::NullArgument, format!("`{name}` is null"));
    }
    out.write(v);
    Ok(())
}

fn into_c_string(s: String) -> FfiResult<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|_| fail(SeStatus::InvalidArgument, "output contains a NUL byte"))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn se_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn se_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a rendered map. `palette` may be NULL for the ascii palette.
///
/// # Safety
/// `text` and `palette` must be NULL or NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn se_grid_parse(
    text: *const c_char,
    palette: *const c_char,
    out: *mut *mut SeGrid,
) -> SeStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let palette = palette_arg(palette)?;
        let map = parse_grid(text, &palette)
            .and_then(|g| g.into_map())
            .or_else(|e| fail(SeStatus::ParseError, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(SeGrid { map })), "out")
    })
}

/// # Safety
/// `grid` must be NULL or a grid from [`se_grid_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn se_grid_free(grid: *mut SeGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Width in cells, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live grid.
#[no_mangle]
pub unsafe extern "C" fn se_grid_width(grid: *const SeGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.map.width())
}

/// Height in cells, 0 for NULL.
///
/// # Safety
/// `grid` must be NULL or a live grid.
#[no_mangle]
pub unsafe extern "C" fn se_grid_height(grid: *const SeGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.map.height())
}

/// Render the grid; free the result with [`se_string_free`].
///
/// # Safety
/// `grid` must be a live grid, `palette` NULL or a NUL-terminated string,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn se_grid_render(
    grid: *const SeGrid,
    palette: *const c_char,
    out: *mut *mut c_char,
) -> SeStatus {
    guard(|| {
        let Some(g) = grid.as_ref() else {
            return fail(SeStatus::NullArgument, "`grid` is null");
        };
        let palette = palette_arg(palette)?;
        let text = render_grid(&g.map, &palette)
            .or_else(|e| fail(SeStatus::InvalidArgument, e.to_string()))?;
        write_out(out, into_c_string(text)?, "out")
    })
}

/// Execute free-text instructions ("up, right, down") on the grid. Writes the
/// progress `t`, the number of turning steps `k` and whether the destination
/// was reached.
///
/// # Safety
/// `grid` must be a live grid, `instructions` a NUL-terminated string and
/// the output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn se_grid_execute(
    grid: *const SeGrid,
    instructions: *const c_char,
    out_t: *mut usize,
    out_k: *mut usize,
    out_reached: *mut bool,
) -> SeStatus {
    guard(|| {
        let Some(g) = grid.as_ref() else {
            return fail(SeStatus::NullArgument, "`grid` is null");
        };
        let dirs = parse_directions(str_arg(instructions, "instructions")?);
        let trace = execute_instructions(&g.map, &dirs);
        write_out(out_t, trace.t, "out_t")?;
        write_out(out_k, trace.k, "out_k")?;
        write_out(out_reached, trace.reached_dest, "out_reached")
    })
}

/// Navigation dataset for `k_min..=k_max` as JSONL.
///
/// # Safety
/// `palette` must be NULL or a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn se_nav_generate_jsonl(
    k_min: usize,
    k_max: usize,
    palette: *const c_char,
    out: *mut *mut c_char,
) -> SeStatus {
    guard(|| {
        if k_min < 2 || k_max > 8 || k_min > k_max {
            return fail(
                SeStatus::InvalidArgument,
                format!("k range {k_min}..={k_max} must lie within 2..=8"),
            );
        }
        let palette = palette_arg(palette)?;
        let ds = generate_nav_dataset(k_min..=k_max)
            .or_else(|e| fail(SeStatus::InvalidArgument, e.to_string()))?;
        let recs = ds
            .records(&palette)
            .or_else(|e| fail(SeStatus::InvalidArgument, e.to_string()))?;
        let mut text = String::new();
        for r in &recs {
            let line = serde_json::to_string(r)
                .or_else(|e| fail(SeStatus::InvalidArgument, e.to_string()))?;
            text.push_str(&line);
            text.push('\n');
        }
        write_out(out, into_c_string(text)?, "out")
    })
}

/// Extract the final answer from `raw` and compare it with `gold`.
///
/// # Safety
/// `raw` and `gold` must be NUL-terminated strings; `out_correct` writable.
#[no_mangle]
pub unsafe extern "C" fn se_score_answer(
    raw: *const c_char,
    gold: *const c_char,
    out_correct: *mut bool,
) -> SeStatus {
    guard(|| {
        let judgment = score_answer(str_arg(raw, "raw")?, str_arg(gold, "gold")?);
        write_out(out_correct, judgment.correct, "out_correct")
    })
}

/// Number of distinct tilings of the 5x4 rectangle by {I, I, T, T, L}.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn se_tiling_solution_count(out: *mut usize) -> SeStatus {
    guard(|| {
        let problem = TilingProblem::rectangle(RECT_WIDTH, RECT_HEIGHT, &RECT_PIECES);
        write_out(out, solve_tiling(&problem, Backend::Dlx, true).len(), "out")
    })
}

/// Number of visualizations drawn before the final answer in a transcript.
///
/// # Safety
/// `raw` must be a NUL-terminated string, `palette` NULL or a NUL-terminated
/// string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn se_transcript_viz_count(
    raw: *const c_char,
    palette: *const c_char,
    out: *mut usize,
) -> SeStatus {
    guard(|| {
        let raw = str_arg(raw, "raw")?;
        let palette = palette_arg(palette)?;
        write_out(out, parse_transcript_with(raw, &palette, &[], 1).l_v, "out")
    })
}
