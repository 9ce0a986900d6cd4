#ifndef TREECOUNT_H
#define TREECOUNT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible calls.
 */
typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_POINTER = 1,
  TC_STATUS_INVALID_CONFIG = 2,
  TC_STATUS_NOT_CONVERGED = 3,
  TC_STATUS_OUT_OF_RANGE = 4,
  TC_STATUS_INTERNAL = 5,
} TcStatus;

/**
 * Opaque solved model.
 */
typedef struct TcModel TcModel;

/**
 * Opaque reduced simulation result.
 */
typedef struct TcSimulation TcSimulation;

typedef struct TcModelParams {
  double nodes;
  double mean_degree;
  double ratio;
  double epsilon;
  uint64_t max_iter;
  double fp_tol;
} TcModelParams;

typedef struct TcModelLevel {
  double pmin;
  double nx;
  double nxus;
  double ax;
} TcModelLevel;

typedef struct TcSimConfig {
  uint64_t nodes;
  double mean_degree;
  double ratio;
  double fail_rate;
  uint64_t seed;
  double warmup_time;
  double sample_interval;
  uint64_t num_samples;
  uint64_t max_level;
} TcSimConfig;

typedef struct TcSimLevel {
  double nx_mean;
  double nx_se;
  double axn_mean;
  double axn_se;
  double nxus_frac_mean;
  double nxus_frac_se;
} TcSimLevel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Defaults for a model point: ε = 1e−9, 10 000 iterations, tolerance 1e−12.
 */
struct TcModelParams tc_model_params_default(double nodes, double mean_degree, double ratio);

/**
 * Solves the model. Fails with `NotConverged` (and no handle) if the fixed
 * point does not settle within `max_iter` sweeps.
 *
 * # Safety
 * `params` must be null or point to a valid `TcModelParams`; `out` must be
 * null or point to writable storage for one pointer.
 */
enum TcStatus tc_model_predict(const struct TcModelParams *params, struct TcModel **out);

/**
 * Root aggregate `a_0`, or NaN for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle from `tc_model_predict`.
 */
double tc_model_a0(const struct TcModel *m);

/**
 * Mass not assigned to any finite level (may be slightly negative).
 *
 * # Safety
 * `m` must be null or a live handle from `tc_model_predict`.
 */
double tc_model_residual(const struct TcModel *m);

/**
 * Number of levels `0..=x_max`, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle from `tc_model_predict`.
 */
size_t tc_model_num_levels(const struct TcModel *m);

/**
 * # Safety
 * `m` must be null or a live handle; `out` null or writable.
 */
enum TcStatus tc_model_level(const struct TcModel *m, size_t x, struct TcModelLevel *out);

/**
 * # Safety
 * `m` must be null or a handle from `tc_model_predict` not already freed.
 */
void tc_model_free(struct TcModel *m);

/**
 * Simulation defaults: failure rate 1, seed 0, warmup 50, interval 1,
 * 1000 samples, level cap derived from the model.
 */
struct TcSimConfig tc_sim_config_default(uint64_t nodes, double mean_degree, double ratio);

/**
 * Runs a simulation to completion on the calling thread.
 *
 * # Safety
 * `cfg` must be null or point to a valid `TcSimConfig`; `out` must be null or
 * point to writable storage for one pointer.
 */
enum TcStatus tc_simulate(const struct TcSimConfig *cfg, struct TcSimulation **out);

/**
 * Mean `A_0 / N`; writes its standard error to `se` when non-null.
 *
 * # Safety
 * `s` must be null or a live handle; `se` null or writable.
 */
double tc_sim_a0(const struct TcSimulation *s, double *se);

/**
 * Mean sampled network size.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
double tc_sim_mean_size(const struct TcSimulation *s);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
size_t tc_sim_num_levels(const struct TcSimulation *s);

/**
 * # Safety
 * `s` must be null or a live handle; `out` null or writable.
 */
enum TcStatus tc_sim_level(const struct TcSimulation *s, size_t x, struct TcSimLevel *out);

/**
 * # Safety
 * `s` must be null or a handle from `tc_simulate` not already freed.
 */
void tc_sim_free(struct TcSimulation *s);

/**
 * Message for the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREECOUNT_H */
