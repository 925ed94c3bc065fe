#ifndef MASLOV_H
#define MASLOV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the nonzero values match the CLI exit codes where they overlap.
typedef enum MaslovStatus {
  MASLOV_STATUS_OK = 0,
  // Unknown problem, bad parameter, violated precondition, near eigenvalue.
  MASLOV_STATUS_USAGE = 2,
  // Essential spectrum or loss of hyperbolicity.
  MASLOV_STATUS_DOMAIN = 3,
  // Geometry, solver or method-disagreement failure.
  MASLOV_STATUS_SOLVER = 4,
  MASLOV_STATUS_NULL_POINTER = 5,
  // The output buffer is too small; the required length was written.
  MASLOV_STATUS_BUFFER_TOO_SMALL = 6,
  MASLOV_STATUS_PANIC = 7,
} MaslovStatus;

// Opaque problem handle.
typedef struct MaslovProblem MaslovProblem;

// Integration controls. `half_length <= 0` selects L automatically.
typedef struct MaslovOptions {
  double half_length;
  double dx;
} MaslovOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Default options: automatic L, dx = 0.01.
struct MaslovOptions maslov_options_default(void);

// Builds a catalog problem from `n` key/value pairs.
//
// # Safety
// `name` must be a nul-terminated string, `keys` and `values` must point to
// `n` entries each (or be null with `n == 0`), and `out` must be writable.
enum MaslovStatus maslov_problem_new(const char *name,
                                     const char *const *keys,
                                     const double *values,
                                     size_t n,
                                     struct MaslovProblem **out);

// Releases a handle from [`maslov_problem_new`]; null is ignored.
//
// # Safety
// `p` must come from [`maslov_problem_new`] and not be used afterwards.
void maslov_problem_free(struct MaslovProblem *p);

// Half-dimension n of the phase space (1 or 2).
//
// # Safety
// `p` must be a live handle and `out` writable.
enum MaslovStatus maslov_problem_dimension(const struct MaslovProblem *p, size_t *out);

// Evans function D(lambda). `opts` may be null for defaults.
//
// # Safety
// `p` must be a live handle, `opts` null or valid, `out` writable.
enum MaslovStatus maslov_evans(const struct MaslovProblem *p,
                               double lambda,
                               const struct MaslovOptions *opts,
                               double *out);

// Maslov index from the winding of the angle function.
//
// # Safety
// As for [`maslov_evans`].
enum MaslovStatus maslov_index_by_angle(const struct MaslovProblem *p,
                                        double lambda,
                                        const struct MaslovOptions *opts,
                                        int64_t *out);

// Maslov index as a signed count of crossings with the stable plane.
//
// # Safety
// As for [`maslov_evans`].
enum MaslovStatus maslov_index_by_intersection(const struct MaslovProblem *p,
                                               double lambda,
                                               const struct MaslovOptions *opts,
                                               int64_t *out);

// Roots of D on [lo, hi] from a `grid`-point sign scan.
//
// Writes up to `capacity` roots and always writes the total to `count`;
// returns `BufferTooSmall` when `capacity < count`.
//
// # Safety
// `roots` must have room for `capacity` values (may be null when 0).
enum MaslovStatus maslov_evans_roots(const struct MaslovProblem *p,
                                     double lo,
                                     double hi,
                                     size_t grid,
                                     const struct MaslovOptions *opts,
                                     double *roots,
                                     size_t capacity,
                                     size_t *count);

// Message of the last failure on this thread, or null after a success.
// The pointer stays valid until the next call on the same thread.
const char *maslov_last_error_message(void);

// Library version as a static nul-terminated string.
const char *maslov_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MASLOV_H */
