#include "cvsynth/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cvsynth/error.hpp"
#include "cvsynth/oracle.hpp"
#include "cvsynth/parallel.hpp"
#include "cvsynth/riccati.hpp"
#include "cvsynth/synthesis.hpp"

namespace cvsynth {

namespace {

ordered_json check(const std::string& name, bool pass) {
  ordered_json j;
  j["name"] = name;
  j["pass"] = pass;
  return j;
}

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

// Interior points: boundary samples pulled toward the interior witness.
std::vector<Vector> interior_points(const ProblemSpec& spec, std::size_t count, std::uint64_t seed) {
  const auto boundary = spec.omega.sample_boundary(std::max<std::size_t>(count, 8));
  const Vector& w = spec.omega.interior_witness();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> points;
  points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Vector& b = boundary[k % boundary.size()].point;
    points.push_back(Vector(w + unit(rng) * (b - w)));
  }
  return points;
}

void riccati_suite(const ProblemSpec& spec, const VerifyOptions& opt, ordered_json& checks) {
  const double t = spec.grid.t0;
  const double T_eval = t + spec.grid.horizon;
  const AlphaPolicy zero = AlphaPolicy::constant(0.0);

  const RiccatiSolution fin = solve_finite_horizon(spec, zero, t, T_eval);
  const StructuralReport fs = structural_check(fin);
  ordered_json c = check("riccati.finite_structure", fs.terminal_zero && fs.max_asymmetry == 0.0 && fs.psd);
  c["terminal_zero"] = fs.terminal_zero;
  c["max_asymmetry"] = fs.max_asymmetry;
  c["min_eigenvalue"] = fs.min_eigenvalue;
  checks.push_back(c);

  const RiccatiSolution stab = solve_stabilizing(spec, zero, t, T_eval, opt.riccati_tol);
  const StructuralReport ss = structural_check(stab);
  c = check("riccati.stabilizing_structure", ss.max_asymmetry == 0.0 && ss.psd);
  c["max_asymmetry"] = ss.max_asymmetry;
  c["min_eigenvalue"] = ss.min_eigenvalue;
  checks.push_back(c);

  const auto& cert = *stab.certificate();
  c = check("riccati.stabilizing_certificate", cert.achieved_gap < cert.tol);
  c["achieved_gap"] = cert.achieved_gap;
  c["tol"] = cert.tol;
  c["final_horizon"] = cert.horizons.back();
  checks.push_back(c);

  const MonotoneCheck mono = check_monotone_in_T(spec, zero, t, t, t + 0.5 * spec.grid.horizon, T_eval);
  c = check("riccati.monotone_in_T", mono.ok);
  c["min_eigenvalue"] = mono.min_eigenvalue;
  checks.push_back(c);

  if (spec.time_invariant_from(t)) {
    const SymMatrix Q = SymMatrix::scaled_identity(spec.dim_state, spec.q_weight(t, 0.0));
    const SymMatrix P_are = solve_are_constant(spec.A(t), spec.B(t), spec.R(), Q, 1e-13);
    const double gap = (P_are.matrix() - stab.at(t).matrix()).norm();
    c = check("riccati.are_cross_check", gap <= 1e-6);
    c["frobenius_gap"] = gap;
    checks.push_back(c);
  }
}

void ipc_suite(const ProblemSpec& spec, const VerifyOptions& opt, ordered_json& checks) {
  const double t = spec.grid.t0;
  const AlphaPolicy zero = AlphaPolicy::constant(0.0);
  const RiccatiSolution P = solve_stabilizing(spec, zero, t, t + spec.grid.horizon, opt.riccati_tol);
  const IpcReport report = check_ipc_riccati(spec, P, opt.ipc_time_samples, opt.ipc_density, opt.jobs);
  ordered_json c = check("ipc.closed_loop", report.holds());
  c["report"] = ipc_json(report);
  checks.push_back(c);

  const std::vector<Vector> starts = interior_points(spec, opt.feasibility_runs, opt.seed);
  std::vector<char> exited(starts.size(), 0);
  parallel_for(starts.size(), opt.jobs, [&](std::size_t k) {
    exited[k] = simulate_closed_loop(spec, P, zero, t, starts[k], spec.grid.horizon).violated() ? 1 : 0;
  });
  const auto exits = static_cast<std::size_t>(std::count(exited.begin(), exited.end(), 1));
  c = check("ipc.closed_loop_feasibility", !report.holds() || exits == 0);
  c["runs"] = starts.size();
  c["exits"] = exits;
  checks.push_back(c);
}

// Largest residual over a 20 x 20 probe grid of a finite-horizon solution
// whose node spacing is dt; the probe times are multiples of `spacing`.
double max_hjb_residual(const ProblemSpec& spec, double dt, double spacing, const std::vector<Vector>& xs) {
  ProblemSpec local = spec;
  local.grid.dt = dt;
  const double t = spec.grid.t0;
  const AlphaPolicy zero = AlphaPolicy::constant(0.0);
  const RiccatiSolution P = solve_finite_horizon(local, zero, t, t + 21.0 * spacing);
  double worst = 0.0;
  for (int j = 1; j <= 20; ++j) {
    const double s = P.grid().node(*P.grid().node_index(t + j * spacing));
    for (const Vector& x : xs) worst = std::max(worst, hjb_residual(local, P, zero, s, x));
  }
  return worst;
}

void hjb_suite(const ProblemSpec& spec, const VerifyOptions& opt, ordered_json& checks) {
  const double dt = spec.grid.dt;
  const double spacing = std::max(1.0, std::round(0.1 / dt)) * dt;
  const std::vector<Vector> xs = interior_points(spec, 20, opt.seed + 1);
  const double coarse = max_hjb_residual(spec, dt, spacing, xs);
  const double fine = max_hjb_residual(spec, 0.5 * dt, spacing, xs);
  const bool negligible = coarse < 1e-11;
  const double ratio = negligible ? 4.0 : coarse / fine;
  ordered_json c = check("hjb.second_order", negligible || (ratio >= 3.0 && ratio <= 5.0));
  c["dt"] = dt;
  c["max_residual_dt"] = coarse;
  c["max_residual_half_dt"] = fine;
  c["ratio"] = num(coarse / fine);
  checks.push_back(c);
}

void oracle_suite(const ProblemSpec& spec, const VerifyOptions& opt, ordered_json& checks) {
  if (spec.dim_state > 2 || spec.dim_control > 2) {
    ordered_json c = check("oracle.skipped", true);
    c["reason"] = "DP oracle runs for state and control dimension <= 2";
    checks.push_back(c);
    return;
  }
  const double t = spec.grid.t0;
  const double T = t + std::min(spec.grid.horizon, 4.0);
  const AlphaPolicy zero = AlphaPolicy::constant(0.0);
  const RiccatiSolution P = solve_finite_horizon(spec, zero, t, T);

  const bool scalar = spec.dim_state == 1;
  std::vector<Vector> probes;
  const Vector& w = spec.omega.interior_witness();
  for (const auto& q : spec.omega.sample_boundary(4)) probes.push_back(Vector(w + 0.5 * (q.point - w)));
  probes.resize(std::min<std::size_t>(probes.size(), 4));

  // Control bound: twice the largest feedback along the probe trajectories.
  double u_peak = 0.0;
  bool feasible = true;
  for (const Vector& x0 : probes) {
    const Trajectory traj = simulate_closed_loop(spec, P, zero, t, x0, T - t);
    feasible = feasible && !traj.violated();
    for (const Vector& u : traj.u) u_peak = std::max(u_peak, u.cwiseAbs().maxCoeff());
  }

  DPProblem dp;
  dp.state_resolution.assign(static_cast<std::size_t>(spec.dim_state), scalar ? 201 : 81);
  dp.control_resolution = spec.dim_control == 1 ? 41 : 21;
  dp.u_max = 2.0 * u_peak + 0.5;
  dp.t0 = t;
  dp.T = T;
  dp.n_steps = scalar ? 400 : 100;
  dp.mode = DPProblem::CostMode::FixedAlpha;
  dp.alpha = zero;
  const DPValueTable table = brute_force_value(dp, spec, opt.jobs);

  double worst_rel = 0.0;
  bool dominated = true;
  ordered_json rows = ordered_json::array();
  for (const Vector& x0 : probes) {
    const double exact = finite_value_from_riccati(spec, P, zero, t, T, x0);
    const double oracle = table.value(0, x0);
    const double scale = 1e-3 + std::abs(exact);
    const double rel = std::abs(oracle - exact) / scale;
    dominated = dominated && oracle >= exact - 0.05 * scale;
    worst_rel = std::max(worst_rel, rel);
    ordered_json row;
    row["x0"] = vector_json(x0);
    row["riccati"] = exact;
    row["oracle"] = num(oracle);
    rows.push_back(row);
  }
  const double rel_tol = scalar ? 0.05 : 0.15;
  ordered_json c = check("oracle.value_agreement", feasible && dominated && worst_rel <= rel_tol);
  c["probes"] = rows;
  c["worst_relative_gap"] = num(worst_rel);
  c["relative_tolerance"] = rel_tol;
  c["max_cfl"] = table.max_cfl;
  c["grid_too_coarse"] = table.grid_too_coarse;
  checks.push_back(c);
}

}  // namespace

bool is_known_suite(const std::string& suite) {
  return suite == "riccati" || suite == "ipc" || suite == "hjb" || suite == "oracle" || suite == "all";
}

ordered_json run_verify(const ProblemSpec& spec, const std::string& suite, const VerifyOptions& options) {
  if (!is_known_suite(suite)) fail(ErrorCode::InvalidValue, "unknown verify suite '" + suite + "'");
  ordered_json checks = ordered_json::array();
  auto run = [&](const std::string& name, auto&& body) {
    if (suite != "all" && suite != name) return;
    try {
      body(spec, options, checks);
    } catch (const Error& e) {
      ordered_json c = check(name + ".error", false);
      c["error"] = std::string(to_string(e.code()));
      c["message"] = e.what();
      checks.push_back(c);
    }
  };
  run("riccati", riccati_suite);
  run("ipc", ipc_suite);
  run("hjb", hjb_suite);
  run("oracle", oracle_suite);

  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  ordered_json report;
  report["suite"] = suite;
  report["checks"] = checks;
  report["pass"] = pass;
  return report;
}

}  // namespace cvsynth
