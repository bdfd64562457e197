/* C interface of the cvsynth library. All objects are opaque handles owned by
 * the caller and released with the matching *_free function. Functions return
 * a cvs_status; on failure cvs_last_error() describes the problem for the
 * calling thread. Strings returned through char** are released with
 * cvs_string_free. Matrices are row-major. */
#ifndef CVSYNTH_H
#define CVSYNTH_H

#include <stddef.h>
#include <stdint.h>

#if defined(CVSYNTH_BUILDING_LIBRARY)
#define CVS_API __attribute__((visibility("default")))
#else
#define CVS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvs_status {
  CVS_OK = 0,
  /* configuration */
  CVS_MISSING_KEY,
  CVS_UNKNOWN_VARIANT,
  CVS_DIMENSION_MISMATCH,
  CVS_NON_POSITIVE_WEIGHT,
  CVS_NONCONFORMING_WEIGHT,
  CVS_GROWTH_VIOLATION,
  CVS_INVALID_VALUE,
  CVS_UNSUPPORTED_VARIANT,
  /* evaluation */
  CVS_SINGULAR_JACOBIAN,
  CVS_NEGATIVE_ALPHA,
  CVS_UNBOUNDED_SUP,
  CVS_NOT_INTEGRABLE,
  CVS_OUT_OF_GRID,
  CVS_INFEASIBLE_STATE,
  /* solvers */
  CVS_NON_FINITE_STATE,
  CVS_NO_CONVERGENCE,
  CVS_NOT_STABILIZABLE,
  CVS_NO_FIXED_POINT,
  CVS_IO,
  /* interface */
  CVS_NULL_ARGUMENT,
  CVS_INTERNAL
} cvs_status;

typedef struct cvs_problem cvs_problem;
typedef struct cvs_alpha cvs_alpha;
typedef struct cvs_riccati cvs_riccati;
typedef struct cvs_trajectory cvs_trajectory;
typedef struct cvs_game cvs_game;

CVS_API const char* cvs_version(void);
CVS_API const char* cvs_status_name(cvs_status status);
/* 1 for malformed or inconsistent problem descriptions. */
CVS_API int cvs_status_is_config_error(cvs_status status);
CVS_API const char* cvs_last_error(void);
CVS_API void cvs_string_free(char* s);
/* Worker threads for parallel sweeps (default 1). Results do not depend on it. */
CVS_API void cvs_set_num_threads(int jobs);

/* Problems */
CVS_API cvs_status cvs_problem_load(const char* path, cvs_problem** out);
CVS_API cvs_status cvs_problem_parse(const char* json_text, cvs_problem** out);
CVS_API void cvs_problem_free(cvs_problem* p);
CVS_API cvs_status cvs_problem_set_dt(cvs_problem* p, double dt);
CVS_API cvs_status cvs_problem_dims(const cvs_problem* p, int* n, int* m);
CVS_API cvs_status cvs_problem_grid(const cvs_problem* p, double* t0, double* dt, double* horizon,
                                    double* t_max);
CVS_API cvs_status cvs_problem_describe(const cvs_problem* p, char** json_out);
CVS_API cvs_status cvs_problem_contains(const cvs_problem* p, const double* x, int* inside);
CVS_API cvs_status cvs_problem_dynamics(const cvs_problem* p, double s, const double* x,
                                        const double* u, double* f_out);
CVS_API cvs_status cvs_problem_lagrangian(const cvs_problem* p, double s, const double* x,
                                          const double* u, double alpha, double* out);

/* Outer-player policies */
CVS_API cvs_status cvs_alpha_constant(double value, cvs_alpha** out);
/* Piecewise constant: values[i] on [nodes[i], nodes[i+1]), tail after the last node. */
CVS_API cvs_status cvs_alpha_samples(const double* nodes, const double* values, size_t count,
                                     double tail, cvs_alpha** out);
/* CSV with columns s,alpha (comment lines starting with '#' and one header line); tail 0. */
CVS_API cvs_status cvs_alpha_load_csv(const char* path, cvs_alpha** out);
CVS_API void cvs_alpha_free(cvs_alpha* a);

/* Riccati solutions */
CVS_API cvs_status cvs_riccati_finite(const cvs_problem* p, const cvs_alpha* alpha, double t,
                                      double T, cvs_riccati** out);
CVS_API cvs_status cvs_riccati_stabilizing(const cvs_problem* p, const cvs_alpha* alpha, double t,
                                           double T_eval, double tol, cvs_riccati** out);
/* P = 0 on [t, T] (open-loop surrogate). */
CVS_API cvs_status cvs_riccati_zero(const cvs_problem* p, double t, double T, cvs_riccati** out);
CVS_API void cvs_riccati_free(cvs_riccati* r);
CVS_API cvs_status cvs_riccati_size(const cvs_riccati* r, size_t* nodes, int* n);
CVS_API cvs_status cvs_riccati_node(const cvs_riccati* r, size_t i, double* s, double* P_out);
CVS_API cvs_status cvs_riccati_at(const cvs_riccati* r, double s, double* P_out);
CVS_API cvs_status cvs_riccati_csv(const cvs_riccati* r, const char* manifest, char** out);
CVS_API cvs_status cvs_riccati_certificate_json(const cvs_riccati* r, char** out);

/* Constraint verification */
CVS_API cvs_status cvs_ipc_check(const cvs_problem* p, const cvs_riccati* r, size_t time_samples,
                                 size_t density, int* holds, char** json_out);
CVS_API cvs_status cvs_geometric_condition(const cvs_problem* p, double delta, size_t density,
                                           double* rho, double* theta, int* holds);

/* Synthesis */
CVS_API cvs_status cvs_simulate(const cvs_problem* p, const cvs_riccati* r, const cvs_alpha* alpha,
                                double t, const double* x0, double T_sim, cvs_trajectory** out);
CVS_API void cvs_trajectory_free(cvs_trajectory* traj);
CVS_API cvs_status cvs_trajectory_size(const cvs_trajectory* traj, size_t* nodes);
CVS_API cvs_status cvs_trajectory_state(const cvs_trajectory* traj, size_t i, double* s, double* x_out);
CVS_API cvs_status cvs_trajectory_exit_time(const cvs_trajectory* traj, int* violated, double* exit_time);
CVS_API cvs_status cvs_trajectory_csv(const cvs_trajectory* traj, const char* manifest, char** out);
/* r may be NULL (no tail). */
CVS_API cvs_status cvs_trajectory_cost(const cvs_problem* p, const cvs_trajectory* traj,
                                       const cvs_alpha* alpha, const cvs_riccati* r,
                                       double* truncated, double* tail);
CVS_API cvs_status cvs_value(const cvs_problem* p, const cvs_riccati* r, const cvs_alpha* alpha,
                             double t, const double* x, double* out);

/* Game */
CVS_API cvs_status cvs_game_solve(const cvs_problem* p, double t, const double* x0, double tol,
                                  int max_iter, double relaxation, double horizon, cvs_game** out);
CVS_API void cvs_game_free(cvs_game* g);
CVS_API cvs_status cvs_game_result(const cvs_game* g, double* W, int* iterations,
                                   double* update_norm, int* converged);
CVS_API cvs_status cvs_game_json(const cvs_game* g, char** out);
CVS_API cvs_status cvs_game_alpha_csv(const cvs_game* g, const char* manifest, char** out);
CVS_API cvs_status cvs_game_trajectory_csv(const cvs_game* g, const char* manifest, char** out);
CVS_API cvs_status cvs_constant_alpha_sweep(const cvs_problem* p, double t, const double* x,
                                            const double* alpha_grid, size_t count, double window,
                                            double* W_lower, double* best_alpha, const char* manifest,
                                            char** csv_out);

/* Verification suites: riccati, ipc, hjb, oracle, all. */
CVS_API cvs_status cvs_verify(const cvs_problem* p, const char* suite, uint64_t seed, int* pass,
                              char** json_out);

#ifdef __cplusplus
}
#endif

#endif
