#ifndef HERMITE_H
#define HERMITE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HermiteStatus {
  HERMITE_STATUS_OK = 0,
  /**
   * Malformed or out-of-range input.
   */
  HERMITE_STATUS_INVALID_ARGUMENT = 1,
  HERMITE_STATUS_NULL_POINTER = 2,
  /**
   * A computation failed or a check did not hold.
   */
  HERMITE_STATUS_NUMERICAL = 3,
  /**
   * A stream has no further items.
   */
  HERMITE_STATUS_END = 4,
  /**
   * Internal error; the library state is unchanged.
   */
  HERMITE_STATUS_PANIC = 5,
} HermiteStatus;

/**
 * Opaque stream of partial quotients of `e^α`.
 */
typedef struct HermiteCfStream HermiteCfStream;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. The pointer stays valid until
 * the next call into the library on the same thread.
 */
const char *hermite_last_error(void);

/**
 * Library version as a static string.
 */
const char *hermite_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void hermite_string_free(char *s);

/**
 * Opens a stream for `e^alpha` (`alpha` a rational literal such as "7/3").
 * With `count > 0` the stream ends after `count` quotients; otherwise it
 * ends once `q_{n-1}` exceeds `10^qmax_log10`.
 *
 * # Safety
 * `alpha` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HermiteStatus hermite_cf_stream_new(const char *alpha,
                                         uint64_t count,
                                         double qmax_log10,
                                         struct HermiteCfStream **out);

/**
 * Next quotient `a_index` as a decimal string. Returns `End` when the
 * stream is exhausted.
 *
 * # Safety
 * `stream` must come from [`hermite_cf_stream_new`]; `index` and `value`
 * must be valid pointers.
 */
enum HermiteStatus hermite_cf_stream_next(struct HermiteCfStream *stream,
                                          uint64_t *index,
                                          char **value);

/**
 * # Safety
 * `stream` must come from [`hermite_cf_stream_new`] and not have been
 * freed. Null is ignored.
 */
void hermite_cf_stream_free(struct HermiteCfStream *stream);

/**
 * `Δ_n` for comma-separated rationals `alphas` and `n[0..len]`, written as
 * a rational literal.
 *
 * # Safety
 * `alphas` must be NUL-terminated, `n` must point to `len` integers and
 * `out` must be valid.
 */
enum HermiteStatus hermite_mahler_det(const char *alphas, const int64_t *n, size_t len, char **out);

/**
 * The p-adic rooted forest on comma-separated rational `points` with
 * `δ = p^{-1/(p-1)}`, as JSON `{"roots": [...], "edges": [[parent, child], ...]}`
 * over zero-based point indices.
 *
 * # Safety
 * `points` must be NUL-terminated and `out` valid.
 */
enum HermiteStatus hermite_forest_json(const char *points, uint64_t p, char **out);

/**
 * Both sides of the semi-resultant identity for `∏ (z - r_i)^{mult_i}`.
 * `left` and `right` receive `[re, im]`; `deviation` the relative gap.
 *
 * # Safety
 * `re`, `im` and `mult` must point to `len` values; `left` and `right` to
 * two doubles each; `deviation` to one.
 */
enum HermiteStatus hermite_semiresultant(const double *re,
                                         const double *im,
                                         const uint32_t *mult,
                                         size_t len,
                                         double *left,
                                         double *right,
                                         double *deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERMITE_H */
