#ifndef SPATIAL_EVAL_H
#define SPATIAL_EVAL_H

#pragma once

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SeStatus {
  SE_STATUS_OK = 0,
  SE_STATUS_NULL_ARGUMENT = 1,
  SE_STATUS_INVALID_UTF8 = 2,
  SE_STATUS_INVALID_ARGUMENT = 3,
  SE_STATUS_PARSE_ERROR = 4,
  SE_STATUS_PANIC = 5,
} SeStatus;

/**
 * Opaque navigation map.
 */
typedef struct SeGrid SeGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *se_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library that has not
 * been freed yet.
 */
void se_string_free(char *s);

/**
 * Parse a rendered map. `palette` may be NULL for the ascii palette.
 *
 * # Safety
 * `text` and `palette` must be NULL or NUL-terminated strings; `out` must
 * be writable.
 */
enum SeStatus se_grid_parse(const char *text, const char *palette, struct SeGrid **out);

/**
 * # Safety
 * `grid` must be NULL or a grid from [`se_grid_parse`] not yet freed.
 */
void se_grid_free(struct SeGrid *grid);

/**
 * Width in cells, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live grid.
 */
size_t se_grid_width(const struct SeGrid *grid);

/**
 * Height in cells, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live grid.
 */
size_t se_grid_height(const struct SeGrid *grid);

/**
 * Render the grid; free the result with [`se_string_free`].
 *
 * # Safety
 * `grid` must be a live grid, `palette` NULL or a NUL-terminated string,
 * `out` writable.
 */
enum SeStatus se_grid_render(const struct SeGrid *grid, const char *palette, char **out);

/**
 * Execute free-text instructions ("up, right, down") on the grid. Writes the
 * progress `t`, the number of turning steps `k` and whether the destination
 * was reached.
 *
 * # Safety
 * `grid` must be a live grid, `instructions` a NUL-terminated string and
 * the output pointers writable.
 */
enum SeStatus se_grid_execute(const struct SeGrid *grid,
                              const char *instructions,
                              size_t *out_t,
                              size_t *out_k,
                              bool *out_reached);

/**
 * Navigation dataset for `k_min..=k_max` as JSONL.
 *
 * # Safety
 * `palette` must be NULL or a NUL-terminated string; `out` writable.
 */
enum SeStatus se_nav_generate_jsonl(size_t k_min, size_t k_max, const char *palette, char **out);

/**
 * Extract the final answer from `raw` and compare it with `gold`.
 *
 * # Safety
 * `raw` and `gold` must be NUL-terminated strings; `out_correct` writable.
 */
enum SeStatus se_score_answer(const char *raw, const char *gold, bool *out_correct);

/**
 * Number of distinct tilings of the 5x4 rectangle by {I, I, T, T, L}.
 *
 * # Safety
 * `out` must be writable.
 */
enum SeStatus se_tiling_solution_count(size_t *out);

/**
 * Number of visualizations drawn before the final answer in a transcript.
 *
 * # Safety
 * `raw` must be a NUL-terminated string, `palette` NULL or a NUL-terminated
 * string, `out` writable.
 */
enum SeStatus se_transcript_viz_count(const char *raw, const char *palette, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPATIAL_EVAL_H */
