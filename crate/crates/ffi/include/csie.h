#ifndef CSIE_H
#define CSIE_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsieStatus {
  CSIE_STATUS_OK = 0,
  CSIE_STATUS_NULL_POINTER = 1,
  CSIE_STATUS_INVALID_ARGUMENT = 2,
  CSIE_STATUS_PARSE = 3,
  CSIE_STATUS_INSUFFICIENT_DATA = 4,
  CSIE_STATUS_DEGENERATE = 5,
  CSIE_STATUS_BUFFER_TOO_SMALL = 6,
  CSIE_STATUS_PANIC = 7,
} CsieStatus;

typedef enum CsieEstimator {
  CSIE_ESTIMATOR_CLOSE_TO_CLOSE = 0,
  CSIE_ESTIMATOR_PARKINSON = 1,
  CSIE_ESTIMATOR_GARMAN_KLASS = 2,
  CSIE_ESTIMATOR_ROGERS_SATCHELL = 3,
  CSIE_ESTIMATOR_YANG_ZHANG = 4,
  CSIE_ESTIMATOR_INTRINSIC_ENTROPY = 5,
} CsieEstimator;

/**
 * A parsed index OHLCV series.
 */
typedef struct CsieIndexSeries CsieIndexSeries;

/**
 * A parsed end-of-day cross-section.
 */
typedef struct CsieMarketDay CsieMarketDay;

/**
 * One day's CSIE values.
 */
typedef struct CsieDayResult {
  /**
   * Date as `YYYYMMDD`.
   */
  uint32_t date;
  size_t m;
  size_t listed;
  double total_value;
  double f;
  double h_oc;
  double h_olhc;
  double csie_signed;
  double csie_abs;
  bool degenerate;
} CsieDayResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *csie_version(void);

/**
 * Message for the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *csie_last_error(void);

/**
 * Mixing weight `f(m)` for a cross-section of `m` symbols.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum CsieStatus csie_weight_f(size_t m, double alpha, double *out);

/**
 * Yang–Zhang mixing constant for a window of `n` days.
 *
 * # Safety
 * `out` must be a valid pointer to a `double`.
 */
enum CsieStatus csie_yz_k(size_t n, double *out);

/**
 * Parses one EOD file (`symbol,open,high,low,close,volume` rows) for the date `YYYYMMDD`.
 *
 * Malformed rows are skipped; the call fails only if no row survives.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` to writable storage for a handle.
 */
enum CsieStatus csie_market_day_parse(const uint8_t *data,
                                      size_t len,
                                      uint32_t yyyymmdd,
                                      struct CsieMarketDay **out);

/**
 * Rows in the cross-section, including zero-volume ones. 0 for null.
 *
 * # Safety
 * `day` must be null or a live handle from [`csie_market_day_parse`].
 */
size_t csie_market_day_len(const struct CsieMarketDay *day);

/**
 * Computes the day's CSIE with mixing parameter `alpha` (1.34 by convention).
 *
 * # Safety
 * `day` must be a live handle and `out` a valid pointer.
 */
enum CsieStatus csie_market_day_compute(const struct CsieMarketDay *day,
                                        double alpha,
                                        struct CsieDayResult *out);

/**
 * # Safety
 * `day` must be null or a handle not yet freed.
 */
void csie_market_day_free(struct CsieMarketDay *day);

/**
 * Parses an index CSV (`Date,Open,High,Low,Close[,Adj Close],Volume`).
 *
 * # Safety
 * `data` must point to `len` readable bytes; `name` must be null or NUL-terminated;
 * `out` must be writable.
 */
enum CsieStatus csie_index_parse(const uint8_t *data,
                                 size_t len,
                                 const char *name,
                                 struct CsieIndexSeries **out);

/**
 * Number of bars. 0 for null.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t csie_index_len(const struct CsieIndexSeries *series);

/**
 * Rolling `window`-day estimates into caller buffers.
 *
 * `estimator` takes a [`CsieEstimator`] value. `*out_len` receives the number of points. If `capacity` is smaller, nothing
 * is written and the status is `BufferTooSmall`. `dates` may be null.
 *
 * # Safety
 * `series` must be a live handle; `values` (and `dates` when non-null) must hold
 * `capacity` elements; `out_len` must be valid.
 */
enum CsieStatus csie_index_rolling(const struct CsieIndexSeries *series,
                                   uint32_t estimator,
                                   size_t window,
                                   bool absolute,
                                   double *values,
                                   uint32_t *dates,
                                   size_t capacity,
                                   size_t *out_len);

/**
 * # Safety
 * `series` must be null or a handle not yet freed.
 */
void csie_index_free(struct CsieIndexSeries *series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSIE_H */
