#ifndef NITSCHE_CUT_H
#define NITSCHE_CUT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of the C interface.
 */
typedef enum NcStatus {
  NC_STATUS_OK = 0,
  NC_STATUS_NULL_POINTER = 1,
  NC_STATUS_INVALID_ARGUMENT = 2,
  NC_STATUS_SLIVER_DEGENERATE = 3,
  NC_STATUS_SOLVE_FAILED = 4,
  NC_STATUS_IO = 5,
  NC_STATUS_INTERNAL = 6,
} NcStatus;

typedef enum NcExample {
  NC_EXAMPLE_EX1_TRI = 0,
  NC_EXAMPLE_EX1_QUAD = 1,
  NC_EXAMPLE_EX2 = 2,
  NC_EXAMPLE_EX3 = 3,
  NC_EXAMPLE_EX4 = 4,
} NcExample;

typedef enum NcVariant {
  NC_VARIANT_NITSCHE = 0,
  NC_VARIANT_HYBRID = 1,
} NcVariant;

/**
 * Per-row outcome, mirroring the CSV `status` column.
 */
typedef enum NcRowStatus {
  NC_ROW_STATUS_OK = 0,
  NC_ROW_STATUS_SLIVER_DEGENERATE = 1,
  NC_ROW_STATUS_SOLVE_FAILED = 2,
} NcRowStatus;

/**
 * Opaque sweep configuration.
 */
typedef struct NcConfig NcConfig;

/**
 * Opaque sweep results together with the configuration that produced them.
 */
typedef struct NcResults NcResults;

/**
 * One sweep row. Diagnostic fields are NaN unless `has_diagnostics`.
 */
typedef struct NcRecord {
  double epsilon;
  size_t n_dofs;
  size_t m;
  size_t n;
  double lambda_max;
  double err_energy;
  double err_h1;
  double err_l2;
  bool has_diagnostics;
  double c_est;
  double big_c_est;
  double cea_ratio;
  enum NcRowStatus status;
} NcRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failed call on this thread, or an empty
 * string. The pointer stays valid until the next failure on the same thread.
 */
const char *nc_last_error(void);

/**
 * New configuration with the defaults for `example` (K = 16, order 1,
 * ε = 2⁻⁴ … 2⁻²⁴, symmetric Nitsche, depth 2, no diagnostics).
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum NcStatus nc_config_new(enum NcExample example, struct NcConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from [`nc_config_new`] not yet freed.
 */
void nc_config_free(struct NcConfig *config);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
enum NcStatus nc_config_set_k(struct NcConfig *config, size_t k);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
enum NcStatus nc_config_set_order(struct NcConfig *config, size_t order);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
enum NcStatus nc_config_set_depth(struct NcConfig *config, size_t depth);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
enum NcStatus nc_config_set_diagnostics(struct NcConfig *config, bool on);

/**
 * `cap` is ignored for [`NcVariant::Nitsche`].
 *
 * # Safety
 * `config` must be null or a live handle.
 */
enum NcStatus nc_config_set_variant(struct NcConfig *config, enum NcVariant variant, double cap);

/**
 * Geometric ε list `from, from·factor, …` down to `to`.
 *
 * # Safety
 * `config` must be null or a live handle.
 */
enum NcStatus nc_config_set_eps_geometric(struct NcConfig *config,
                                          double from,
                                          double to,
                                          double factor);

/**
 * Explicit ε list; must be strictly descending and positive.
 *
 * # Safety
 * `config` must be null or a live handle; `eps` must point to `len` doubles.
 */
enum NcStatus nc_config_set_eps_list(struct NcConfig *config, const double *eps, size_t len);

/**
 * Run the sweep. Rows with a degenerate parameter or failed solve are
 * reported through their row status; the call itself still succeeds.
 *
 * # Safety
 * `config` must be null or a live handle; `out` null or valid for writes.
 */
enum NcStatus nc_run_sweep(const struct NcConfig *config, struct NcResults **out);

/**
 * # Safety
 * `results` must be null or a handle from [`nc_run_sweep`] not yet freed.
 */
void nc_results_free(struct NcResults *results);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `results` must be null or a live handle.
 */
size_t nc_results_len(const struct NcResults *results);

/**
 * # Safety
 * `results` must be null or a live handle; `out` null or valid for writes.
 */
enum NcStatus nc_results_get(const struct NcResults *results, size_t index, struct NcRecord *out);

/**
 * Write the results as CSV to the UTF-8 path `path`.
 *
 * # Safety
 * `results` must be null or a live handle; `path` null or a NUL-terminated
 * string.
 */
enum NcStatus nc_results_write_csv(const struct NcResults *results, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NITSCHE_CUT_H */
