/* C interface for the arhgof library. Generated; do not edit. */

#ifndef ARHGOF_H
#define ARHGOF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C-ABI call.
 */
typedef enum ArhgofStatus {
  /**
   * Success.
   */
  ArhgofOk = 0,
  /**
   * A pointer argument was null or text was not valid UTF-8.
   */
  ArhgofInvalidArgument = 1,
  /**
   * Configuration or input data was rejected.
   */
  ArhgofConfigError = 2,
  /**
   * A numerical procedure failed.
   */
  ArhgofNumericalError = 3,
  /**
   * An internal panic was caught at the boundary.
   */
  ArhgofPanic = 4,
} ArhgofStatus;

/**
 * An autocorrelation kernel (hypothesized or estimated).
 */
typedef struct ArhgofKernel ArhgofKernel;

/**
 * A simulated or loaded functional time series.
 */
typedef struct ArhgofSeries ArhgofSeries;

/**
 * The outcome of one goodness-of-fit test run.
 */
typedef struct ArhgofTestResult ArhgofTestResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failed call on this thread. The pointer
 * stays valid until the next failing call on the same thread. Never
 * null; empty before any failure.
 */
const char *arhgof_last_error_message(void);

/**
 * Simulates a series from configuration text (`key = value` lines; null
 * for all defaults) and writes a new handle to `out`.
 *
 * # Safety
 * `config` must be null or a valid NUL-terminated string; `out` must be
 * a valid pointer.
 */
enum ArhgofStatus arhgof_series_simulate(const char *config, struct ArhgofSeries **out);

/**
 * Loads a series from a CSV file (header `t,node_0,...`).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` a valid pointer.
 */
enum ArhgofStatus arhgof_series_read_csv(const char *path, struct ArhgofSeries **out);

/**
 * Writes a series to a CSV file.
 *
 * # Safety
 * `series` must be a live handle; `path` a valid NUL-terminated string.
 */
enum ArhgofStatus arhgof_series_write_csv(const struct ArhgofSeries *series, const char *path);

/**
 * Number of observations; 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
uintptr_t arhgof_series_len(const struct ArhgofSeries *series);

/**
 * Number of grid nodes per observation; 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
uintptr_t arhgof_series_grid_len(const struct ArhgofSeries *series);

/**
 * Value at observation `t`, node `node`; NaN when out of range.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
double arhgof_series_value(const struct ArhgofSeries *series, uintptr_t t, uintptr_t node);

/**
 * Releases a series handle (null is a no-op).
 *
 * # Safety
 * `series` must be null or a handle not freed before.
 */
void arhgof_series_free(struct ArhgofSeries *series);

/**
 * Runs the goodness-of-fit test on a series.
 *
 * `config` supplies the projection-direction laws (null = defaults);
 * `gamma0` is the hypothesized kernel (null = zero operator);
 * `n_projections` and `n_bootstrap` must be ≥ 1; `misspecified` tests
 * residuals against an operator estimated from the sample.
 *
 * # Safety
 * `series` must be a live handle; `gamma0` null or a live handle;
 * `config` null or a valid NUL-terminated string; `out` valid.
 */
enum ArhgofStatus arhgof_test_run(const struct ArhgofSeries *series,
                                  const char *config,
                                  const struct ArhgofKernel *gamma0,
                                  uintptr_t n_projections,
                                  uintptr_t n_bootstrap,
                                  bool standardized,
                                  double alpha,
                                  uint64_t seed,
                                  bool misspecified,
                                  struct ArhgofTestResult **out);

/**
 * Combined p-value; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double arhgof_test_result_combined_p(const struct ArhgofTestResult *result);

/**
 * Whether the combined p-value rejects at the configured level; false
 * for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
bool arhgof_test_result_reject(const struct ArhgofTestResult *result);

/**
 * Number of projections tested; 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
uintptr_t arhgof_test_result_n_projections(const struct ArhgofTestResult *result);

/**
 * Observed statistic of projection `index`; NaN when out of range.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double arhgof_test_result_statistic(const struct ArhgofTestResult *result, uintptr_t index);

/**
 * Bootstrap p-value of projection `index`; NaN when out of range.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double arhgof_test_result_p_value(const struct ArhgofTestResult *result, uintptr_t index);

/**
 * Releases a test-result handle (null is a no-op).
 *
 * # Safety
 * `result` must be null or a handle not freed before.
 */
void arhgof_test_result_free(struct ArhgofTestResult *result);

/**
 * Estimates the autocorrelation operator from a series. `k` is the
 * truncation level (0 = data-driven schedule); on success writes the
 * kernel handle to `out` and, when `out_k_n` is non-null, the level
 * actually used.
 *
 * # Safety
 * `series` must be a live handle; `out` valid; `out_k_n` null or valid.
 */
enum ArhgofStatus arhgof_estimate_run(const struct ArhgofSeries *series,
                                      uintptr_t k,
                                      struct ArhgofKernel **out,
                                      uintptr_t *out_k_n);

/**
 * Loads a kernel from a CSV file (square matrix, no header).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` valid.
 */
enum ArhgofStatus arhgof_kernel_read_csv(const char *path, struct ArhgofKernel **out);

/**
 * Writes a kernel to a CSV file.
 *
 * # Safety
 * `kernel` must be a live handle; `path` a valid NUL-terminated string.
 */
enum ArhgofStatus arhgof_kernel_write_csv(const struct ArhgofKernel *kernel, const char *path);

/**
 * Grid size of a kernel; 0 for a null handle.
 *
 * # Safety
 * `kernel` must be null or a live handle.
 */
uintptr_t arhgof_kernel_grid_len(const struct ArhgofKernel *kernel);

/**
 * Kernel entry at (row, col); NaN when out of range.
 *
 * # Safety
 * `kernel` must be null or a live handle.
 */
double arhgof_kernel_value(const struct ArhgofKernel *kernel, uintptr_t row, uintptr_t col);

/**
 * Operator norm of the kernel as a map on the function space; NaN for
 * a null handle.
 *
 * # Safety
 * `kernel` must be null or a live handle.
 */
double arhgof_kernel_operator_norm(const struct ArhgofKernel *kernel);

/**
 * Releases a kernel handle (null is a no-op).
 *
 * # Safety
 * `kernel` must be null or a handle not freed before.
 */
void arhgof_kernel_free(struct ArhgofKernel *kernel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARHGOF_H */
