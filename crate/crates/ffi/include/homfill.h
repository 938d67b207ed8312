#ifndef HOMFILL_H
#define HOMFILL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HfSolver {
  HF_SOLVER_ILP = 0,
  HF_SOLVER_BRUTE = 1,
} HfSolver;

typedef enum HfStatus {
  HF_STATUS_OK = 0,
  HF_STATUS_NULL_POINTER = 1,
  HF_STATUS_INVALID_UTF8 = 2,
  HF_STATUS_PARSE = 3,
  // Infeasible in the ball, budgets, unclosed words and similar outcomes.
  HF_STATUS_DOMAIN = 4,
  // An internal consistency check failed.
  HF_STATUS_INVARIANT = 5,
  HF_STATUS_IO = 6,
  HF_STATUS_PANIC = 7,
} HfStatus;

// A ball in the Cayley complex of a group.
typedef struct HfBall HfBall;

// A parsed group file.
typedef struct HfGroup HfGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string.
const char *hf_version(void);

// Message of the last failed call on this thread, or NULL.
const char *hf_last_error(void);

// # Safety
// `s` is NULL or a string returned by this library, not yet freed.
void hf_string_free(char *s);

// Parses a group file held in memory.
//
// # Safety
// `text` is a NUL-terminated string; `out` points to writable storage.
enum HfStatus hf_group_parse(const char *text, struct HfGroup **out);

// # Safety
// `path` is a NUL-terminated string; `out` points to writable storage.
enum HfStatus hf_group_load(const char *path, struct HfGroup **out);

// # Safety
// `g` is NULL or a handle from `hf_group_parse`/`hf_group_load`, not yet freed.
void hf_group_free(struct HfGroup *g);

// Number of generators, stable letters included.
//
// # Safety
// `g` is a live group handle.
size_t hf_group_rank(const struct HfGroup *g);

// # Safety
// `g` is a live group handle; `out` points to writable storage.
enum HfStatus hf_ball_build(const struct HfGroup *g, size_t radius, struct HfBall **out);

// # Safety
// `b` is NULL or a handle from `hf_ball_build`, not yet freed.
void hf_ball_free(struct HfBall *b);

// Vertex, edge and cell counts; any output pointer may be NULL.
//
// # Safety
// `b` is a live ball handle; non-NULL outputs point to writable storage.
enum HfStatus hf_ball_counts(const struct HfBall *b,
                             size_t *vertices,
                             size_t *edges,
                             size_t *cells);

// Minimal filling area of the loop `word` read from the identity. A loop
// with no filling inside the ball gives `HF_STATUS_DOMAIN`.
//
// # Safety
// `b` is a live ball handle, `word` a NUL-terminated string and `area`
// writable.
enum HfStatus hf_fill_area(const struct HfBall *b,
                           const char *word,
                           enum HfSolver solver,
                           int64_t *area);

// Filling-area table up to `n_max` as JSON.
//
// # Safety
// `b` is a live ball handle and `out` writable.
enum HfStatus hf_fa_table_json(const struct HfBall *b, size_t n_max, char **out);

// Area-radius pair up to `n_max` as JSON, minimal-area policy.
//
// # Safety
// `b` is a live ball handle and `out` writable.
enum HfStatus hf_arpair_json(const struct HfBall *b, size_t n_max, char **out);

// Transfer constants of an extension group as JSON.
//
// # Safety
// `g` is a live group handle and `out` writable.
enum HfStatus hf_constants_json(const struct HfGroup *g, size_t kernel_radius, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* HOMFILL_H */
