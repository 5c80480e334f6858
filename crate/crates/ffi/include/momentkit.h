#ifndef MOMENTKIT_H
#define MOMENTKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MkStatus {
  MK_OK = 0,
  // The command ran and a check failed; the report is still returned.
  MK_VERIFY_FAILED = 1,
  MK_PARSE_ERROR = 2,
  MK_INVALID_ARGUMENT = 3,
  MK_PANIC = 4,
} MkStatus;

typedef enum MkSpace {
  MK_SPACE_BASE = 0,
  MK_SPACE_TOT = 1,
} MkSpace;

// Opaque parsed model.
typedef struct MkModel MkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses model text into a new handle stored in `*out`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum MkStatus mk_model_parse(const char *text, struct MkModel **out);

// Releases a handle from `mk_model_parse` or `mk_generate`. Null is a no-op.
//
// # Safety
// `model` must come from this library and not be freed twice.
void mk_model_free(struct MkModel *model);

// Canonical model text.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum MkStatus mk_model_render(const struct MkModel *model, char **out);

// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum MkStatus mk_verify(const struct MkModel *model, char **out);

// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum MkStatus mk_trivialize(const struct MkModel *model, char **out);

// Bracket of two total-space expressions such as `x*s^2`.
//
// # Safety
// `model` must be a live handle, `left`/`right` NUL-terminated strings and
// `out` a valid pointer.
enum MkStatus mk_tot_bracket(const struct MkModel *model,
                             const char *left,
                             const char *right,
                             char **out);

// Rank at a point declared in the model.
//
// # Safety
// `model` must be a live handle, `point` a NUL-terminated string and `out`
// a valid pointer.
enum MkStatus mk_rank(const struct MkModel *model,
                      const char *point,
                      enum MkSpace space,
                      char **out);

// Extends every conformal field declared in the model.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum MkStatus mk_conformal(const struct MkModel *model, char **out);

// Twist-then-trivialize suite over `cases` seeds starting at `seed`.
//
// # Safety
// `out` must be a valid pointer.
enum MkStatus mk_roundtrip(uint64_t cases, uint64_t seed, char **out);

// Seeded random model with default bounds.
//
// # Safety
// `out` must be a valid pointer.
enum MkStatus mk_generate(uint64_t seed, struct MkModel **out);

// Message for the most recent failure on this thread, or null. Valid until
// the next call into this library on the same thread.
const char *mk_last_error_message(void);

// Releases a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must come from this library and not be freed twice.
void mk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMENTKIT_H */
