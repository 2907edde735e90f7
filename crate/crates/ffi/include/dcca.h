#ifndef DCCA_H
#define DCCA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum DccaStatus {
  DCCA_STATUS_OK = 0,
  DCCA_STATUS_NULL_POINTER = 1,
  DCCA_STATUS_INVALID_ARGUMENT = 2,
  // The scale configuration cannot work with the series length.
  DCCA_STATUS_INFEASIBLE = 3,
  // Non-finite data, zero fluctuation, failed factorization and similar.
  DCCA_STATUS_NUMERICAL = 4,
  DCCA_STATUS_IO = 5,
  DCCA_STATUS_PARSE = 6,
  // A Rust panic was caught at the boundary.
  DCCA_STATUS_INTERNAL = 7,
} DccaStatus;

// Test configuration handle.
typedef struct DccaConfig DccaConfig;

// Test result handle.
typedef struct DccaResult DccaResult;

// Covariance table handle.
typedef struct DccaTable DccaTable;

// Summary numbers of a test result.
typedef struct DccaSummary {
  double statistic;
  double threshold;
  double p_value;
  double p_value_stderr;
  // 1 when independence is rejected.
  int32_t reject;
  // +1 or -1 for the direction of a rejection, 0 otherwise.
  int32_t direction;
  size_t scales;
} DccaSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next call.
const char *dcca_last_error(void);

// Library version as a static NUL-terminated string.
const char *dcca_version(void);

// The covariance table compiled into the library.
enum DccaStatus dcca_table_builtin(struct DccaTable **out);

// Loads a covariance table file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DccaStatus dcca_table_load(const char *path, struct DccaTable **out);

// # Safety
// `table` must come from this library and not be used afterwards. Null is ignored.
void dcca_table_free(struct DccaTable *table);

// Writes up to `capacity` log-spaced scales to `scales` and their count to `written`.
//
// # Safety
// `scales` must hold `capacity` elements; `written` must be writable.
enum DccaStatus dcca_make_scales(size_t len,
                                 size_t n_min,
                                 size_t n_max,
                                 size_t count,
                                 size_t degree,
                                 size_t *scales,
                                 size_t capacity,
                                 size_t *written);

// New configuration: `κ = r`, level 0.05, automatic Hurst range, 10⁵ Monte Carlo draws, seed 0.
//
// # Safety
// `scales` must hold `count` elements; `out` must be writable.
enum DccaStatus dcca_config_new(const size_t *scales,
                                size_t count,
                                size_t degree,
                                struct DccaConfig **out);

// # Safety
// `config` must come from this library and not be used afterwards. Null is ignored.
void dcca_config_free(struct DccaConfig *config);

// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_kappa(struct DccaConfig *config, size_t kappa);

// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_level(struct DccaConfig *config, double level);

// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_mc_samples(struct DccaConfig *config, size_t samples);

// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_seed(struct DccaConfig *config, uint64_t seed);

// Uses the covariance at known Hurst exponents.
//
// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_hurst_known(struct DccaConfig *config, double h, double g);

// Uses the worst case over the given Hurst ranges.
//
// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_hurst_range(struct DccaConfig *config,
                                            double h_low,
                                            double h_high,
                                            double g_low,
                                            double g_high);

// Uses the worst case over DFA estimates `± margin`.
//
// # Safety
// `config` must be a live handle.
enum DccaStatus dcca_config_set_hurst_auto(struct DccaConfig *config, double margin);

// Tests two increment series of length `len` for long-range cross-correlation.
//
// # Safety
// `y1` and `y2` must hold `len` values; the handles must be live; `out` must be writable.
enum DccaStatus dcca_test(const struct DccaTable *table,
                          const struct DccaConfig *config,
                          const double *y1,
                          const double *y2,
                          size_t len,
                          struct DccaResult **out);

// # Safety
// `result` must come from this library and not be used afterwards. Null is ignored.
void dcca_result_free(struct DccaResult *result);

// # Safety
// `result` must be a live handle; `out` must be writable.
enum DccaStatus dcca_result_summary(const struct DccaResult *result, struct DccaSummary *out);

// Copies the per-scale coefficients into `rho`, which must hold at least
// `DccaSummary::scales` values.
//
// # Safety
// `result` must be a live handle; `rho` must hold `capacity` values.
enum DccaStatus dcca_result_rho(const struct DccaResult *result, double *rho, size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCCA_H */
