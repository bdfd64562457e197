#include "cvsynth/cvsynth.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "cvsynth/config.hpp"
#include "cvsynth/error.hpp"
#include "cvsynth/game.hpp"
#include "cvsynth/ipc.hpp"
#include "cvsynth/report.hpp"
#include "cvsynth/riccati.hpp"
#include "cvsynth/synthesis.hpp"
#include "cvsynth/verify.hpp"

struct cvs_problem {
  cvsynth::ProblemSpec spec;
};
struct cvs_alpha {
  cvsynth::AlphaPolicy policy;
};
struct cvs_riccati {
  cvsynth::RiccatiSolution solution;
};
struct cvs_trajectory {
  cvsynth::Trajectory traj;
};
struct cvs_game {
  cvsynth::GameSolution solution;
};

namespace {

using cvsynth::ErrorCode;
using cvsynth::Vector;

thread_local std::string g_last_error;
std::atomic<int> g_jobs{1};

cvs_status status_of(ErrorCode code) {
  // ErrorCode and cvs_status enumerate the same conditions in the same order.
  return static_cast<cvs_status>(static_cast<int>(code) + 1);
}

template <class F>
cvs_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CVS_OK;
  } catch (const cvsynth::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CVS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CVS_INTERNAL;
  }
}

cvs_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return CVS_NULL_ARGUMENT;
}

#define CVS_REQUIRE(ptr)                      \
  do {                                        \
    if ((ptr) == nullptr) return null_argument(#ptr); \
  } while (0)

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Vector to_vector(const double* data, Eigen::Index n) { return Eigen::Map<const Vector>(data, n); }

void write_matrix(const cvsynth::Matrix& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  }
}

std::string manifest_of(const char* manifest) { return manifest == nullptr ? std::string() : manifest; }

}  // namespace

extern "C" {

const char* cvs_version(void) { return "0.1.0"; }

const char* cvs_status_name(cvs_status status) {
  switch (status) {
    case CVS_OK: return "Ok";
    case CVS_NULL_ARGUMENT: return "NullArgument";
    case CVS_INTERNAL: return "Internal";
    default:
      if (status > CVS_OK && status <= CVS_IO) {
        return cvsynth::to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
      }
      return "Unknown";
  }
}

int cvs_status_is_config_error(cvs_status status) {
  return status >= CVS_MISSING_KEY && status <= CVS_UNSUPPORTED_VARIANT ? 1 : 0;
}

const char* cvs_last_error(void) { return g_last_error.c_str(); }

void cvs_string_free(char* s) { std::free(s); }

void cvs_set_num_threads(int jobs) { g_jobs = jobs < 1 ? 1 : jobs; }

cvs_status cvs_problem_load(const char* path, cvs_problem** out) {
  CVS_REQUIRE(path);
  CVS_REQUIRE(out);
  return guard([&] { *out = new cvs_problem{cvsynth::load_problem(path)}; });
}

cvs_status cvs_problem_parse(const char* json_text, cvs_problem** out) {
  CVS_REQUIRE(json_text);
  CVS_REQUIRE(out);
  return guard([&] { *out = new cvs_problem{cvsynth::build_problem_from_text(json_text)}; });
}

void cvs_problem_free(cvs_problem* p) { delete p; }

cvs_status cvs_problem_set_dt(cvs_problem* p, double dt) {
  CVS_REQUIRE(p);
  return guard([&] {
    cvsynth::ProblemSpec copy = p->spec;
    copy.grid.dt = dt;
    cvsynth::validate(copy);
    p->spec = std::move(copy);
  });
}

cvs_status cvs_problem_dims(const cvs_problem* p, int* n, int* m) {
  CVS_REQUIRE(p);
  if (n != nullptr) *n = static_cast<int>(p->spec.dim_state);
  if (m != nullptr) *m = static_cast<int>(p->spec.dim_control);
  return CVS_OK;
}

cvs_status cvs_problem_grid(const cvs_problem* p, double* t0, double* dt, double* horizon, double* t_max) {
  CVS_REQUIRE(p);
  const auto& g = p->spec.grid;
  if (t0 != nullptr) *t0 = g.t0;
  if (dt != nullptr) *dt = g.dt;
  if (horizon != nullptr) *horizon = g.horizon;
  if (t_max != nullptr) *t_max = g.t_max;
  return CVS_OK;
}

cvs_status cvs_problem_describe(const cvs_problem* p, char** json_out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(json_out);
  return guard([&] { *json_out = copy_string(cvsynth::describe_problem(p->spec).dump(2)); });
}

cvs_status cvs_problem_contains(const cvs_problem* p, const double* x, int* inside) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(x);
  CVS_REQUIRE(inside);
  return guard([&] {
    *inside = p->spec.omega.contains(to_vector(x, p->spec.dim_state), p->spec.omega.tol_active()) ? 1 : 0;
  });
}

cvs_status cvs_problem_dynamics(const cvs_problem* p, double s, const double* x, const double* u, double* f_out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(x);
  CVS_REQUIRE(u);
  CVS_REQUIRE(f_out);
  return guard([&] {
    const Vector f = cvsynth::eval_dynamics(p->spec, s, to_vector(x, p->spec.dim_state),
                                            to_vector(u, p->spec.dim_control));
    for (Eigen::Index i = 0; i < f.size(); ++i) f_out[i] = f[i];
  });
}

cvs_status cvs_problem_lagrangian(const cvs_problem* p, double s, const double* x, const double* u,
                                  double alpha, double* out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(x);
  CVS_REQUIRE(u);
  CVS_REQUIRE(out);
  return guard([&] {
    *out = cvsynth::eval_lagrangian(p->spec, s, to_vector(x, p->spec.dim_state),
                                    to_vector(u, p->spec.dim_control), alpha);
  });
}

cvs_status cvs_alpha_constant(double value, cvs_alpha** out) {
  CVS_REQUIRE(out);
  return guard([&] {
    if (!(value >= 0.0)) cvsynth::fail(ErrorCode::NegativeAlpha, "alpha must be >= 0");
    *out = new cvs_alpha{cvsynth::AlphaPolicy::constant(value)};
  });
}

cvs_status cvs_alpha_samples(const double* nodes, const double* values, size_t count, double tail, cvs_alpha** out) {
  CVS_REQUIRE(nodes);
  CVS_REQUIRE(values);
  CVS_REQUIRE(out);
  return guard([&] {
    *out = new cvs_alpha{cvsynth::AlphaPolicy(std::vector<double>(nodes, nodes + count),
                                              std::vector<double>(values, values + count), tail)};
  });
}

cvs_status cvs_alpha_load_csv(const char* path, cvs_alpha** out) {
  CVS_REQUIRE(path);
  CVS_REQUIRE(out);
  return guard([&] {
    std::ifstream in(path);
    if (!in) cvsynth::fail(ErrorCode::Io, std::string("cannot open alpha file ") + path);
    std::vector<double> nodes;
    std::vector<double> values;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') continue;
      if (!header_seen) {
        header_seen = true;
        continue;
      }
      std::istringstream row(line);
      double s = 0.0;
      double a = 0.0;
      char comma = 0;
      if (!(row >> s >> comma >> a) || comma != ',') {
        cvsynth::fail(ErrorCode::InvalidValue, "alpha file line " + std::to_string(line_no) + " is not 's,alpha'");
      }
      nodes.push_back(s);
      values.push_back(a);
    }
    if (nodes.empty()) cvsynth::fail(ErrorCode::InvalidValue, "alpha file has no data rows");
    *out = new cvs_alpha{cvsynth::AlphaPolicy(std::move(nodes), std::move(values), 0.0)};
  });
}

void cvs_alpha_free(cvs_alpha* a) { delete a; }

cvs_status cvs_riccati_finite(const cvs_problem* p, const cvs_alpha* alpha, double t, double T, cvs_riccati** out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(alpha);
  CVS_REQUIRE(out);
  return guard([&] { *out = new cvs_riccati{cvsynth::solve_finite_horizon(p->spec, alpha->policy, t, T)}; });
}

cvs_status cvs_riccati_stabilizing(const cvs_problem* p, const cvs_alpha* alpha, double t, double T_eval,
                                   double tol, cvs_riccati** out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(alpha);
  CVS_REQUIRE(out);
  return guard([&] {
    *out = new cvs_riccati{cvsynth::solve_stabilizing(p->spec, alpha->policy, t, T_eval, tol)};
  });
}

cvs_status cvs_riccati_zero(const cvs_problem* p, double t, double T, cvs_riccati** out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(out);
  return guard([&] {
    if (T < t) cvsynth::fail(ErrorCode::InvalidValue, "T must be >= t");
    const cvsynth::TimeGrid grid =
        T == t ? cvsynth::TimeGrid(t, p->spec.grid.dt, 0) : cvsynth::TimeGrid::covering(t, T, p->spec.grid.dt);
    *out = new cvs_riccati{cvsynth::RiccatiSolution::zero(grid, p->spec.dim_state)};
  });
}

void cvs_riccati_free(cvs_riccati* r) { delete r; }

cvs_status cvs_riccati_size(const cvs_riccati* r, size_t* nodes, int* n) {
  CVS_REQUIRE(r);
  if (nodes != nullptr) *nodes = r->solution.values().size();
  if (n != nullptr) *n = static_cast<int>(r->solution.dim());
  return CVS_OK;
}

cvs_status cvs_riccati_node(const cvs_riccati* r, size_t i, double* s, double* P_out) {
  CVS_REQUIRE(r);
  return guard([&] {
    if (i >= r->solution.values().size()) cvsynth::fail(ErrorCode::OutOfGrid, "node index out of range");
    if (s != nullptr) *s = r->solution.grid().node(i);
    if (P_out != nullptr) write_matrix(r->solution.node(i).matrix(), P_out);
  });
}

cvs_status cvs_riccati_at(const cvs_riccati* r, double s, double* P_out) {
  CVS_REQUIRE(r);
  CVS_REQUIRE(P_out);
  return guard([&] { write_matrix(r->solution.at(s).matrix(), P_out); });
}

cvs_status cvs_riccati_csv(const cvs_riccati* r, const char* manifest, char** out) {
  CVS_REQUIRE(r);
  CVS_REQUIRE(out);
  return guard([&] { *out = copy_string(cvsynth::riccati_csv(r->solution, manifest_of(manifest))); });
}

cvs_status cvs_riccati_certificate_json(const cvs_riccati* r, char** out) {
  CVS_REQUIRE(r);
  CVS_REQUIRE(out);
  return guard([&] { *out = copy_string(cvsynth::certificate_json(r->solution).dump(2)); });
}

cvs_status cvs_ipc_check(const cvs_problem* p, const cvs_riccati* r, size_t time_samples, size_t density,
                         int* holds, char** json_out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(r);
  return guard([&] {
    const cvsynth::IpcReport report =
        cvsynth::check_ipc_riccati(p->spec, r->solution, time_samples, density, g_jobs.load());
    if (holds != nullptr) *holds = report.holds() ? 1 : 0;
    if (json_out != nullptr) *json_out = copy_string(cvsynth::ipc_json(report).dump(2));
  });
}

cvs_status cvs_geometric_condition(const cvs_problem* p, double delta, size_t density, double* rho,
                                   double* theta, int* holds) {
  CVS_REQUIRE(p);
  return guard([&] {
    const cvsynth::GeometricReport g = cvsynth::geometric_condition(p->spec, delta, density);
    if (rho != nullptr) *rho = g.rho;
    if (theta != nullptr) *theta = g.theta;
    if (holds != nullptr) *holds = g.holds ? 1 : 0;
  });
}

cvs_status cvs_simulate(const cvs_problem* p, const cvs_riccati* r, const cvs_alpha* alpha, double t,
                        const double* x0, double T_sim, cvs_trajectory** out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(r);
  CVS_REQUIRE(alpha);
  CVS_REQUIRE(x0);
  CVS_REQUIRE(out);
  return guard([&] {
    *out = new cvs_trajectory{cvsynth::simulate_closed_loop(p->spec, r->solution, alpha->policy, t,
                                                            to_vector(x0, p->spec.dim_state), T_sim)};
  });
}

void cvs_trajectory_free(cvs_trajectory* traj) { delete traj; }

cvs_status cvs_trajectory_size(const cvs_trajectory* traj, size_t* nodes) {
  CVS_REQUIRE(traj);
  CVS_REQUIRE(nodes);
  *nodes = traj->traj.size();
  return CVS_OK;
}

cvs_status cvs_trajectory_state(const cvs_trajectory* traj, size_t i, double* s, double* x_out) {
  CVS_REQUIRE(traj);
  return guard([&] {
    if (i >= traj->traj.size()) cvsynth::fail(ErrorCode::OutOfGrid, "trajectory index out of range");
    if (s != nullptr) *s = traj->traj.s[i];
    if (x_out != nullptr) {
      const Vector& x = traj->traj.xi[i];
      for (Eigen::Index k = 0; k < x.size(); ++k) x_out[k] = x[k];
    }
  });
}

cvs_status cvs_trajectory_exit_time(const cvs_trajectory* traj, int* violated, double* exit_time) {
  CVS_REQUIRE(traj);
  if (violated != nullptr) *violated = traj->traj.violated() ? 1 : 0;
  if (exit_time != nullptr && traj->traj.exit_time) *exit_time = *traj->traj.exit_time;
  return CVS_OK;
}

cvs_status cvs_trajectory_csv(const cvs_trajectory* traj, const char* manifest, char** out) {
  CVS_REQUIRE(traj);
  CVS_REQUIRE(out);
  return guard([&] { *out = copy_string(cvsynth::trajectory_csv(traj->traj, manifest_of(manifest))); });
}

cvs_status cvs_trajectory_cost(const cvs_problem* p, const cvs_trajectory* traj, const cvs_alpha* alpha,
                               const cvs_riccati* r, double* truncated, double* tail) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(traj);
  CVS_REQUIRE(alpha);
  return guard([&] {
    const cvsynth::TrajectoryCost cost = cvsynth::cost_of_trajectory(
        p->spec, traj->traj, alpha->policy, r == nullptr ? nullptr : &r->solution);
    if (truncated != nullptr) *truncated = cost.truncated;
    if (tail != nullptr) *tail = cost.tail;
  });
}

cvs_status cvs_value(const cvs_problem* p, const cvs_riccati* r, const cvs_alpha* alpha, double t,
                     const double* x, double* out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(r);
  CVS_REQUIRE(alpha);
  CVS_REQUIRE(x);
  CVS_REQUIRE(out);
  return guard([&] {
    *out = cvsynth::value_from_riccati(p->spec, r->solution, alpha->policy, t, to_vector(x, p->spec.dim_state));
  });
}

cvs_status cvs_game_solve(const cvs_problem* p, double t, const double* x0, double tol, int max_iter,
                          double relaxation, double horizon, cvs_game** out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(x0);
  CVS_REQUIRE(out);
  return guard([&] {
    cvsynth::GameOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.relaxation = relaxation;
    options.horizon = horizon;
    *out = new cvs_game{cvsynth::solve_coupled(p->spec, t, to_vector(x0, p->spec.dim_state), options)};
  });
}

void cvs_game_free(cvs_game* g) { delete g; }

cvs_status cvs_game_result(const cvs_game* g, double* W, int* iterations, double* update_norm, int* converged) {
  CVS_REQUIRE(g);
  const auto& sol = g->solution;
  if (W != nullptr) *W = sol.W;
  if (iterations != nullptr) *iterations = sol.iterations;
  if (update_norm != nullptr) *update_norm = sol.alpha_update_norm;
  if (converged != nullptr) *converged = sol.converged ? 1 : 0;
  return CVS_OK;
}

cvs_status cvs_game_json(const cvs_game* g, char** out) {
  CVS_REQUIRE(g);
  CVS_REQUIRE(out);
  return guard([&] { *out = copy_string(cvsynth::game_json(g->solution).dump(2)); });
}

cvs_status cvs_game_alpha_csv(const cvs_game* g, const char* manifest, char** out) {
  CVS_REQUIRE(g);
  CVS_REQUIRE(out);
  return guard([&] { *out = copy_string(cvsynth::alpha_csv(g->solution.xi_star, manifest_of(manifest))); });
}

cvs_status cvs_game_trajectory_csv(const cvs_game* g, const char* manifest, char** out) {
  CVS_REQUIRE(g);
  CVS_REQUIRE(out);
  return guard([&] { *out = copy_string(cvsynth::trajectory_csv(g->solution.xi_star, manifest_of(manifest))); });
}

cvs_status cvs_constant_alpha_sweep(const cvs_problem* p, double t, const double* x, const double* alpha_grid,
                                    size_t count, double window, double* W_lower, double* best_alpha,
                                    const char* manifest, char** csv_out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(x);
  CVS_REQUIRE(alpha_grid);
  return guard([&] {
    const cvsynth::ConstantAlphaSweep sweep = cvsynth::sup_over_constant_alpha(
        p->spec, t, to_vector(x, p->spec.dim_state), std::vector<double>(alpha_grid, alpha_grid + count), window,
        1e-10, g_jobs.load());
    if (W_lower != nullptr) *W_lower = sweep.W_lower;
    if (best_alpha != nullptr) *best_alpha = sweep.best_alpha;
    if (csv_out != nullptr) *csv_out = copy_string(cvsynth::sweep_csv(sweep, manifest_of(manifest)));
  });
}

cvs_status cvs_verify(const cvs_problem* p, const char* suite, uint64_t seed, int* pass, char** json_out) {
  CVS_REQUIRE(p);
  CVS_REQUIRE(suite);
  return guard([&] {
    cvsynth::VerifyOptions options;
    options.jobs = g_jobs.load();
    options.seed = seed;
    const cvsynth::ordered_json report = cvsynth::run_verify(p->spec, suite, options);
    if (pass != nullptr) *pass = report["pass"].get<bool>() ? 1 : 0;
    if (json_out != nullptr) *json_out = copy_string(report.dump(2) + "\n");
  });
}

}  // extern "C"
