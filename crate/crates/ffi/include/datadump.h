#ifndef DATADUMP_H
#define DATADUMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Result code of every fallible call.
 */
typedef enum DdStatus {
  DD_STATUS_OK = 0,
  DD_STATUS_INVALID_PARAMETER = 1,
  DD_STATUS_NON_CONVERGENCE = 2,
  DD_STATUS_DEGENERATE_MATRIX = 3,
  DD_STATUS_INVARIANT_VIOLATION = 4,
  DD_STATUS_NULL_POINTER = 5,
  DD_STATUS_PANIC = 6,
} DdStatus;

typedef enum DdFirstBestRegime {
  DD_FIRST_BEST_REGIME_INTERIOR = 0,
  DD_FIRST_BEST_REGIME_CORNER_N0_ZERO = 1,
  DD_FIRST_BEST_REGIME_SHUTDOWN = 2,
} DdFirstBestRegime;

typedef enum DdSecondBestRegime {
  DD_SECOND_BEST_REGIME_POOLING = 0,
  DD_SECOND_BEST_REGIME_DISCRIMINATION = 1,
  DD_SECOND_BEST_REGIME_DISCRIMINATION_CORNER_N0_ZERO = 2,
  DD_SECOND_BEST_REGIME_SHUTDOWN = 3,
} DdSecondBestRegime;

typedef enum DdBetaRegime {
  DD_BETA_REGIME_FULL_ACCESS = 0,
  DD_BETA_REGIME_EXCLUSION = 1,
} DdBetaRegime;

/**
 * Four-type model parameters. Opaque to C.
 */
typedef struct DdBetaModel DdBetaModel;

/**
 * Model parameters. Opaque to C.
 */
typedef struct DdModel DdModel;

typedef struct DdFirstBest {
  double n0;
  double n1;
  double profit;
  double fee_nowcaster;
  double fee_forecaster;
  enum DdFirstBestRegime regime;
} DdFirstBest;

typedef struct DdPlan {
  double q0;
  double q1;
  double fee;
} DdPlan;

/**
 * Screening menu: `plan_s` for nowcasters, `plan_l` for forecasters.
 */
typedef struct DdMenu {
  struct DdPlan plan_s;
  struct DdPlan plan_l;
} DdMenu;

typedef struct DdSecondBest {
  double n0;
  double n1;
  double profit;
  double lambda_star;
  struct DdMenu menu;
  enum DdSecondBestRegime regime;
} DdSecondBest;

typedef struct DdComparison {
  struct DdFirstBest first_best;
  struct DdSecondBest second_best;
  double delta_n0;
  double delta_n1;
  double delta_total;
  bool composition_reversed;
} DdComparison;

typedef struct DdBetaFirstBest {
  double n_star;
  double profit;
} DdBetaFirstBest;

/**
 * Fees are in type order `r, s, 1 - s, 1 - r`.
 */
typedef struct DdBetaSolution {
  double n_store;
  double q_broad;
  double fees[4];
  double profit;
  double first_best_n;
  enum DdBetaRegime regime;
} DdBetaSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a model handle. On success `*out` owns a handle that must be
 * released with `dd_model_free`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum DdStatus dd_model_new(double sigma_mu_sq, double cost, double lambda, struct DdModel **out);

/**
 * Releases a handle from `dd_model_new`. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void dd_model_free(struct DdModel *model);

/**
 * Forecaster willingness to pay for access `(n0, n1)`.
 *
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_value_l(const struct DdModel *model, double n0, double n1, double *out);

/**
 * Nowcaster willingness to pay for access `(n0, n1)`.
 *
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_value_s(const struct DdModel *model, double n0, double n1, double *out);

/**
 * Nowcaster share above which forecasters lose current-data access.
 *
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_lambda_star(const struct DdModel *model, double n0, double *out);

/**
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_first_best(const struct DdModel *model, double tol, struct DdFirstBest *out);

/**
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_second_best(const struct DdModel *model,
                             bool markov_constraint,
                             double tol,
                             struct DdSecondBest *out);

/**
 * Revenue-maximizing menu for a fixed database.
 *
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_menu_for_database(const struct DdModel *model,
                                   double n0,
                                   double n1,
                                   struct DdMenu *out);

/**
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_compare(const struct DdModel *model, struct DdComparison *out);

/**
 * Creates a four-type model handle, released with `dd_beta_free`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum DdStatus dd_beta_new(double r,
                          double s,
                          double p_r,
                          double sigma_sq,
                          double cost,
                          struct DdBetaModel **out);

/**
 * Releases a handle from `dd_beta_new`. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void dd_beta_free(struct DdBetaModel *model);

/**
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_beta_first_best(const struct DdBetaModel *model,
                                 double tol,
                                 struct DdBetaFirstBest *out);

/**
 * # Safety
 * `model` must be a live handle or null; `out` null or valid for writes.
 */
enum DdStatus dd_beta_second_best(const struct DdBetaModel *model,
                                  double tol,
                                  struct DdBetaSolution *out);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to fit, into `buf`. Returns the buffer size needed for the
 * full message including the terminator, or 0 when there is none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t dd_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DATADUMP_H */
