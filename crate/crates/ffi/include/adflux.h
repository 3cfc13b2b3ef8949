#ifndef ADFLUX_H
#define ADFLUX_H

#include <stddef.h>
#include <stdint.h>

// Status codes returned by every fallible function.
typedef enum AdfluxStatus {
  ADFLUX_STATUS_OK = 0,
  ADFLUX_STATUS_INVALID_INPUT = 1,
  ADFLUX_STATUS_ROOT_FAILURE = 2,
  ADFLUX_STATUS_INVARIANT_VIOLATION = 3,
  ADFLUX_STATUS_UNSUPPORTED_REFERENCE = 4,
  ADFLUX_STATUS_CONFIG = 5,
  ADFLUX_STATUS_NULL_POINTER = 6,
  ADFLUX_STATUS_BUFFER_TOO_SMALL = 7,
  ADFLUX_STATUS_PANIC = 8,
} AdfluxStatus;

// A resolved problem: flux model, initial data, domain and final time.
typedef struct AdfluxProblem AdfluxProblem;

// The outcome of running a problem on one grid.
typedef struct AdfluxRun AdfluxRun;

// Constants a run used.
typedef struct AdfluxConstants {
  size_t m_cells;
  double dx;
  double alpha_bar;
  double m_bound;
  double lambda;
  double dt;
  size_t n_steps;
  double t_final;
  double tv_beta0;
} AdfluxConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *adflux_last_error(void);

// Library version as a static NUL-terminated string.
const char *adflux_version(void);

// Builds a problem from a TOML configuration document.
//
// # Safety
// `toml` must be a valid NUL-terminated string and `out` a valid pointer.
enum AdfluxStatus adflux_problem_from_toml(const char *toml, struct AdfluxProblem **out);

// Builds one of the built-in benchmark problems from its reference id.
//
// # Safety
// `id` must be a valid NUL-terminated string and `out` a valid pointer.
enum AdfluxStatus adflux_problem_from_reference(const char *id, struct AdfluxProblem **out);

// Releases a problem. Null is ignored.
//
// # Safety
// `problem` must be null or a handle returned by this library, not yet freed.
void adflux_problem_free(struct AdfluxProblem *problem);

// Final time of the problem.
//
// # Safety
// `problem` and `out` must be valid pointers.
enum AdfluxStatus adflux_problem_t_final(const struct AdfluxProblem *problem, double *out);

// Evaluates the flux `A(x, u)`.
//
// # Safety
// `problem` and `out` must be valid pointers.
enum AdfluxStatus adflux_problem_flux(const struct AdfluxProblem *problem,
                                      double x,
                                      double u,
                                      double *out);

// Runs the problem to its final time on `m_cells` cells. A run that stops
// on an invariant violation is still returned; query it with
// [`adflux_run_passed`].
//
// # Safety
// `problem` and `out` must be valid pointers.
enum AdfluxStatus adflux_run(const struct AdfluxProblem *problem,
                             size_t m_cells,
                             struct AdfluxRun **out);

// Releases a run. Null is ignored.
//
// # Safety
// `run` must be null or a handle returned by this library, not yet freed.
void adflux_run_free(struct AdfluxRun *run);

// Number of interior cells of the run's grid.
//
// # Safety
// `run` must be a valid handle.
size_t adflux_run_cell_count(const struct AdfluxRun *run);

// Writes 1 to `out` when the run finished with every monitored check
// satisfied, 0 otherwise.
//
// # Safety
// `run` and `out` must be valid pointers.
enum AdfluxStatus adflux_run_passed(const struct AdfluxRun *run, int32_t *out);

// Copies cell centers and final values into caller buffers of length `len`.
// Either buffer may be null to skip it.
//
// # Safety
// Non-null buffers must hold at least `len` doubles.
enum AdfluxStatus adflux_run_solution(const struct AdfluxRun *run,
                                      double *x,
                                      double *u,
                                      size_t len);

// L1 error against the reference solution at the final time.
//
// # Safety
// `run` and `out` must be valid pointers.
enum AdfluxStatus adflux_run_l1_error(const struct AdfluxRun *run, double *out);

// Copies the run constants into `out`.
//
// # Safety
// `run` and `out` must be valid pointers.
enum AdfluxStatus adflux_run_constants(const struct AdfluxRun *run, struct AdfluxConstants *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADFLUX_H */
