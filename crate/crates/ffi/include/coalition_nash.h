#ifndef COALITION_NASH_H
#define COALITION_NASH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CN_ALGORITHM_SPECIAL = 0,
  CN_ALGORITHM_GENERAL = 1,
} CnAlgorithm;

/**
 * Result code of every fallible call.
 */
typedef enum {
  CN_STATUS_OK = 0,
  CN_STATUS_NULL_POINTER = 1,
  CN_STATUS_INVALID_UTF8 = 2,
  CN_STATUS_PARSE = 3,
  CN_STATUS_VALIDATION = 4,
  CN_STATUS_IO = 5,
  CN_STATUS_TOPOLOGY = 6,
  CN_STATUS_NUMERICAL = 7,
  CN_STATUS_DIVERGED = 8,
  CN_STATUS_INVALID_ARGUMENT = 9,
  CN_STATUS_BUFFER_TOO_SMALL = 10,
  CN_STATUS_NOT_FOUND = 11,
  CN_STATUS_PANIC = 12,
} CnStatus;

/**
 * Game built from a scenario.
 */
typedef struct CnGame CnGame;

/**
 * Parsed, validated scenario.
 */
typedef struct CnScenario CnScenario;

/**
 * Completed run with its logged records.
 */
typedef struct CnTrajectory CnTrajectory;

/**
 * Step-size certificate; `gamma*` fields are NaN when the scheme has none.
 */
typedef struct {
  CnAlgorithm algorithm;
  double bound;
  double rate;
  double mu;
  double gamma;
  double gamma_psi;
  double gamma_xi;
} CnCertificate;

/**
 * Iteration controls; `stop_tol` of zero or infinity runs the full budget.
 */
typedef struct {
  size_t max_iters;
  double stop_tol;
  size_t log_stride;
  /**
   * Track the Lyapunov descent; needs a certificate for the game.
   */
  bool monitor_descent;
} CnRunOptions;

/**
 * Whole-run figures.
 */
typedef struct {
  CnAlgorithm algorithm;
  double step;
  size_t iterations;
  size_t records;
  bool stopped_early;
  double max_constraint_residual;
  /**
   * NaN for the estimation-only scheme.
   */
  double max_tracking_residual;
  /**
   * Descent violations; -1 when descent was not monitored.
   */
  int64_t descent_violations;
} CnRunSummary;

/**
 * Scalar part of one logged record; optional values are NaN when absent.
 */
typedef struct {
  size_t k;
  double constraint_residual;
  double e_xi_norm;
  double e_psi_norm;
  double tracking_residual;
  double lyapunov;
  double dist_to_ne;
  double kkt_residual;
} CnRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *cn_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cn_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string obtained from this library and not yet freed.
 */
void cn_string_free(char *s);

/**
 * Parses scenario JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
CnStatus cn_scenario_from_json(const char *json, CnScenario **out);

/**
 * Loads a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
CnStatus cn_scenario_from_file(const char *path, CnScenario **out);

/**
 * Loads an embedded scenario (`"case1"` or `"case2"`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
CnStatus cn_scenario_builtin(const char *name, CnScenario **out);

/**
 * # Safety
 * `scenario` must be NULL or a handle from this library not yet freed.
 */
void cn_scenario_free(CnScenario *scenario);

/**
 * Serializes the scenario; free the result with [`cn_string_free`].
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
CnStatus cn_scenario_to_json(const CnScenario *scenario, char **out);

/**
 * Builds the game described by the scenario.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
CnStatus cn_scenario_build_game(const CnScenario *scenario, CnGame **out);

/**
 * Runs the scenario as configured and writes `trajectory.csv` and `report.json` into `out_dir`.
 *
 * # Safety
 * `scenario` must be a live handle, `out_dir` a NUL-terminated string and `out` a writable pointer.
 */
CnStatus cn_scenario_run(const CnScenario *scenario, const char *out_dir, CnTrajectory **out);

/**
 * # Safety
 * `game` must be NULL or a handle from this library not yet freed.
 */
void cn_game_free(CnGame *game);

/**
 * Total number of agents, or 0 for NULL.
 *
 * # Safety
 * `game` must be NULL or a live handle.
 */
size_t cn_game_agent_count(const CnGame *game);

/**
 * Number of coalitions, or 0 for NULL.
 *
 * # Safety
 * `game` must be NULL or a live handle.
 */
size_t cn_game_coalition_count(const CnGame *game);

/**
 * Solves for the equilibrium; writes it to `x_out` and, if non-NULL, the KKT residual.
 *
 * # Safety
 * `game` must be a live handle and `x_out` must hold `len` doubles.
 */
CnStatus cn_game_solve_ne(const CnGame *game, double *x_out, size_t len, double *kkt_residual);

/**
 * Coalition objective values at `x`.
 *
 * # Safety
 * `x` must hold `len` doubles and `out` `out_len` doubles.
 */
CnStatus cn_game_coalition_values(const CnGame *game,
                                  const double *x,
                                  size_t len,
                                  double *out,
                                  size_t out_len);

/**
 * Stationarity residual of the equilibrium conditions at `x`.
 *
 * # Safety
 * `x` must hold `len` doubles and `out` must be writable.
 */
CnStatus cn_game_kkt_residual(const CnGame *game, const double *x, size_t len, double *out);

/**
 * Step-size certificate of `algorithm` on `game`.
 *
 * # Safety
 * `game` must be a live handle and `out` writable.
 */
CnStatus cn_game_certify(const CnGame *game, CnAlgorithm algorithm, CnCertificate *out);

/**
 * Defaults: 20000 iterations, no early stop, every iterate logged.
 */
CnRunOptions cn_run_options_default(void);

/**
 * Runs `algorithm` with `step` from the game's initial point.
 *
 * `options` may be NULL for the defaults. Records carry the distance to the
 * equilibrium, and Lyapunov values whenever a certificate exists.
 *
 * # Safety
 * `game` must be a live handle, `options` NULL or readable, `out` writable.
 */
CnStatus cn_game_run(const CnGame *game,
                     CnAlgorithm algorithm,
                     double step,
                     const CnRunOptions *options,
                     CnTrajectory **out);

/**
 * # Safety
 * `trajectory` must be NULL or a handle from this library not yet freed.
 */
void cn_trajectory_free(CnTrajectory *trajectory);

/**
 * # Safety
 * `trajectory` must be a live handle and `out` writable.
 */
CnStatus cn_trajectory_summary(const CnTrajectory *trajectory, CnRunSummary *out);

/**
 * Final decision vector.
 *
 * # Safety
 * `trajectory` must be a live handle and `out` must hold `len` doubles.
 */
CnStatus cn_trajectory_final_x(const CnTrajectory *trajectory, double *out, size_t len);

/**
 * Scalar fields of record `index`.
 *
 * # Safety
 * `trajectory` must be a live handle and `out` writable.
 */
CnStatus cn_trajectory_record(const CnTrajectory *trajectory, size_t index, CnRecord *out);

/**
 * Decision vector of record `index`.
 *
 * # Safety
 * `trajectory` must be a live handle and `out` must hold `len` doubles.
 */
CnStatus cn_trajectory_record_x(const CnTrajectory *trajectory,
                                size_t index,
                                double *out,
                                size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COALITION_NASH_H */
