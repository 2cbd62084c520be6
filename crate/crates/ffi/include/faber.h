#ifndef FABER_H
#define FABER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum FaberStatus {
  FABER_STATUS_OK = 0,
  FABER_STATUS_NULL_POINTER = 1,
  FABER_STATUS_INVALID_ARGUMENT = 2,
  FABER_STATUS_COMPUTATION_ERROR = 3,
  FABER_STATUS_PARSE_ERROR = 4,
  FABER_STATUS_PANIC = 5,
} FaberStatus;

/**
 * Opaque truncated Faber series.
 */
typedef struct FaberSeriesHandle FaberSeriesHandle;

/**
 * Sample callback: returns `f(x)` for a point of `dim` coordinates.
 */
typedef double (*FaberSampleFn)(const double *x, size_t dim, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Owned by the
 * library and valid until the next call on this thread.
 */
const char *faber_last_error(void);

/**
 * Samples `f` on the sparse grid of budget `n` and returns `I_n f`.
 * `f` is called from one thread at a time.
 *
 * # Safety
 * `out` must be valid for writes; `f` must be safe to call with
 * `user_data`.
 */
enum FaberStatus faber_analyze(size_t dim,
                               uint32_t n,
                               FaberSampleFn f,
                               void *user_data,
                               struct FaberSeriesHandle **out);

/**
 * # Safety
 * `h` must come from this library and not have been freed; null is ignored.
 */
void faber_series_free(struct FaberSeriesHandle *h);

/**
 * # Safety
 * `h` must be a live handle, `x` must point to `dim` doubles, `out` valid
 * for writes.
 */
enum FaberStatus faber_series_evaluate(const struct FaberSeriesHandle *h,
                                       const double *x,
                                       size_t dim,
                                       double *out);

/**
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum FaberStatus faber_series_integrate(const struct FaberSeriesHandle *h, double *out);

/**
 * Dimension, budget and stored coefficient count.
 *
 * # Safety
 * `h` must be a live handle; each out-pointer may be null to skip it.
 */
enum FaberStatus faber_series_shape(const struct FaberSeriesHandle *h,
                                    size_t *dim,
                                    uint32_t *budget,
                                    size_t *coefficients);

/**
 * Coefficient `c_{j,k}`; `j` and `k` hold `dim` entries each.
 *
 * # Safety
 * `h` must be a live handle, `j` and `k` must point to `dim` values each,
 * `out` valid for writes.
 */
enum FaberStatus faber_series_coefficient(const struct FaberSeriesHandle *h,
                                          const int32_t *j,
                                          const uint64_t *k,
                                          size_t dim,
                                          double *out);

/**
 * `s^r_{p,q}b` norm of the stored levels; pass `q = INFINITY` for the
 * supremum over levels.
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum FaberStatus faber_series_seq_norm(const struct FaberSeriesHandle *h,
                                       double r,
                                       double p,
                                       double q,
                                       double *out);

/**
 * Serializes to the line-oriented text format. Free the result with
 * [`faber_string_free`].
 *
 * # Safety
 * `h` must be a live handle and `out` valid for writes.
 */
enum FaberStatus faber_series_to_text(const struct FaberSeriesHandle *h, char **out);

/**
 * Parses the text format.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` valid for writes.
 */
enum FaberStatus faber_series_from_text(const char *text, struct FaberSeriesHandle **out);

/**
 * # Safety
 * `s` must come from this library and not have been freed; null is ignored.
 */
void faber_string_free(char *s);

/**
 * Number of distinct sampling nodes used by `I_n` in dimension `dim`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum FaberStatus faber_node_count(uint32_t n, size_t dim, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FABER_H */
