#ifndef DIGOPT_H
#define DIGOPT_H

/* This file is generated by cbindgen from digopt-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every FFI entry point.
typedef enum digopt_status_t {
  DIGOPT_STATUS_T_OK = 0,
  DIGOPT_STATUS_T_NULL_ARGUMENT = 1,
  DIGOPT_STATUS_T_INVALID_UTF8 = 2,
  DIGOPT_STATUS_T_SCENARIO_ERROR = 3,
  DIGOPT_STATUS_T_SEED_ERROR = 4,
  DIGOPT_STATUS_T_SOLVER_NOT_CONVERGED = 5,
  DIGOPT_STATUS_T_IO_ERROR = 6,
  DIGOPT_STATUS_T_INDEX_OUT_OF_RANGE = 7,
  DIGOPT_STATUS_T_PANIC = 8,
} digopt_status_t;

// Opaque handle to a finished optimization run.
typedef struct digopt_result_t digopt_result_t;

// Opaque handle to a loaded scenario.
typedef struct digopt_scenario_t digopt_scenario_t;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// # Safety
// `path` must be a valid NUL-terminated string; `out` must be a valid
// pointer to a `DigoptScenario*` slot.
enum digopt_status_t digopt_scenario_load(const char *path, struct digopt_scenario_t **out);

// # Safety
// `scenario` must come from `digopt_scenario_load` and not be freed twice.
void digopt_scenario_free(struct digopt_scenario_t *scenario);

// Seed and optimize. `out_dir` may be NULL to skip writing result files.
// A run that finishes without converging still produces a result handle;
// the return code is `SolverNotConverged`.
//
// # Safety
// `scenario` must be a live handle; `out_dir`, when non-NULL, a valid
// NUL-terminated string; `out` a valid pointer to a `DigoptResult*` slot.
enum digopt_status_t digopt_run(const struct digopt_scenario_t *scenario,
                                const char *out_dir,
                                struct digopt_result_t **out);

// # Safety
// `result` must come from `digopt_run` and not be freed twice.
void digopt_result_free(struct digopt_result_t *result);

// Solver status of a run: 0 converged, 1 max iterations, 2 infeasible
// stall.
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_status(const struct digopt_result_t *result, int *out);

// Final torque cost (sum of squared articulated torque norms).
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_final_cost(const struct digopt_result_t *result, double *out);

// Total trajectory duration in seconds.
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_total_duration(const struct digopt_result_t *result,
                                                  double *out);

// Swept volume of the optimized trajectory (m^3).
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_swept_volume(const struct digopt_result_t *result, double *out);

// Largest constraint violation of the final trajectory.
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_max_violation(const struct digopt_result_t *result, double *out);

// Number of keypoints in the optimized trajectory.
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_num_keypoints(const struct digopt_result_t *result, size_t *out);

// Joint angles of keypoint `index`, written as [swing, boom, stick,
// bucket] into `out[0..4]`.
//
// # Safety
// `result` must be a live handle; `out` must point to at least 4 doubles.
enum digopt_status_t digopt_result_keypoint(const struct digopt_result_t *result,
                                            size_t index,
                                            double *out);

// Duration of segment `index` in seconds.
//
// # Safety
// `result` must be a live handle, `out` a valid pointer.
enum digopt_status_t digopt_result_interval(const struct digopt_result_t *result,
                                            size_t index,
                                            double *out);

// Message describing the most recent error on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *digopt_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIGOPT_H */
