#include "cvsynth/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cvsynth/error.hpp"

namespace cvsynth {

Vector feedback_control(const ProblemSpec& spec, const RiccatiSolution& P, double s, const Vector& x) {
  if (!P.grid().spans(s)) fail(ErrorCode::OutOfGrid, "feedback requested outside the Riccati grid");
  return -spec.r_inverse_scale() * spec.B(s).transpose() * (P.at(s).matrix() * spec.h.forward(x));
}

Trajectory simulate(const ProblemSpec& spec, const ControlLaw& law, const AlphaPolicy& alpha,
                    const TimeGrid& grid, const Vector& x0) {
  const Eigen::Index n = spec.dim_state;
  if (x0.size() != n) fail(ErrorCode::DimensionMismatch, "initial state has the wrong dimension");
  if (!spec.omega.contains(x0, spec.omega.tol_active())) {
    std::ostringstream msg;
    msg << "initial state lies outside Omega (margin " << spec.omega.margin(x0) << ")";
    fail(ErrorCode::InfeasibleState, msg.str());
  }

  Trajectory traj;
  const std::size_t count = grid.size();
  traj.s.reserve(count);
  traj.xi.reserve(count);

  Vector y(n + 1);
  y.head(n) = x0;
  y[n] = 0.0;
  const double exit_tol = spec.omega.tol_active();
  for (std::size_t i = 0; i < count; ++i) {
    const double s = grid.node(i);
    const Vector x = y.head(n);
    const Vector u = law(s, x);
    const double a_i = alpha(s);
    traj.s.push_back(s);
    traj.xi.push_back(x);
    traj.u.push_back(u);
    traj.alpha.push_back(a_i);
    traj.running_cost.push_back(eval_lagrangian(spec, s, x, u, a_i));
    traj.cum_cost.push_back(y[n]);
    traj.omega_margin.push_back(spec.omega.margin(x));
    if (!traj.exit_time && traj.omega_margin.back() < -exit_tol && i > 0) {
      const double m0 = traj.omega_margin[i - 1];
      const double m1 = traj.omega_margin[i];
      const double frac = m0 / (m0 - m1);
      traj.exit_time = traj.s[i - 1] + frac * (s - traj.s[i - 1]);
    }
    if (i + 1 == count) break;

    const double h = grid.node(i + 1) - s;
    const double frozen = alpha(s + 0.5 * h);
    auto rhs = [&](double tau, const Vector& z) {
      const Vector xs = z.head(n);
      const Vector us = law(tau, xs);
      Vector dz(n + 1);
      dz.head(n) = eval_dynamics(spec, tau, xs, us);
      dz[n] = eval_lagrangian(spec, tau, xs, us, frozen);
      return dz;
    };
    y = rk4_step(rhs, s, y, h);
    if (!all_finite(y)) {
      std::ostringstream msg;
      msg << "state became non-finite at s = " << grid.node(i + 1);
      fail(ErrorCode::NonFiniteState, msg.str());
    }
  }
  return traj;
}

Trajectory simulate_closed_loop(const ProblemSpec& spec, const RiccatiSolution& P,
                                const AlphaPolicy& alpha, double t, const Vector& x0, double T_sim) {
  if (!(T_sim >= 0.0)) fail(ErrorCode::InvalidValue, "simulation horizon must be nonnegative");
  const double t_end = t + T_sim;
  if (!P.grid().spans(t) || !P.grid().spans(t_end)) {
    fail(ErrorCode::OutOfGrid, "Riccati grid does not cover the simulation horizon");
  }
  const double dt = std::min(spec.grid.dt, P.grid().dt());
  const TimeGrid grid = T_sim == 0.0 ? TimeGrid(t, dt, 0) : TimeGrid::covering(t, t_end, dt);
  return simulate(spec, [&](double s, const Vector& x) { return feedback_control(spec, P, s, x); },
                  alpha, grid, x0);
}

double value_from_riccati(const ProblemSpec& spec, const RiccatiSolution& P, const AlphaPolicy& alpha,
                          double t, const Vector& x) {
  const double tail = alpha.integral([&](double v) { return spec.b(v); }, t, kInfinity);
  return P.at(t).quadratic_form(spec.h.forward(x)) - tail;
}

double finite_value_from_riccati(const ProblemSpec& spec, const RiccatiSolution& P_T,
                                 const AlphaPolicy& alpha, double t, double T, const Vector& x) {
  if (T < t) fail(ErrorCode::InvalidValue, "finite horizon T must be >= t");
  const double integral = T == t ? 0.0 : alpha.integral([&](double v) { return spec.b(v); }, t, T);
  return P_T.at(t).quadratic_form(spec.h.forward(x)) - integral;
}

double hamiltonian(const ProblemSpec& spec, double s, const Vector& x, const Vector& p, double alpha_val) {
  const Vector hx = spec.h.forward(x);
  const Matrix J_inv = spec.h.jacobian_inverse(x);
  const Vector drift = J_inv * (spec.A(s) * hx);
  // inf over u of <p, J^{-1} B u> + <u, R u> is -<w, R^{-1} w> / 4 with w = B^T J^{-T} p.
  const Vector w = spec.B(s).transpose() * (J_inv.transpose() * p);
  const double control_part = -0.25 * spec.r_inverse_scale() * w.squaredNorm();
  return p.dot(drift) + control_part + spec.q_weight(s, alpha_val) * hx.squaredNorm() - spec.b(alpha_val);
}

double hjb_residual(const ProblemSpec& spec, const RiccatiSolution& P, const AlphaPolicy& alpha,
                    double s, const Vector& x) {
  const TimeGrid& grid = P.grid();
  const double dt = grid.dt();
  const double slack = 1e-9 * dt;
  if (s - dt < grid.t0() - slack || s + dt > grid.t_end() + slack) {
    fail(ErrorCode::OutOfGrid, "HJB residual needs one grid step on both sides of s");
  }
  const Vector hx = spec.h.forward(x);
  const double lo = std::max(grid.t0(), s - dt);
  const double hi = std::min(grid.t_end(), s + dt);
  const double dPdt = (P.at(hi).quadratic_form(hx) - P.at(lo).quadratic_form(hx)) / (hi - lo);
  const double a_s = alpha(s);
  // d/ds of -int_s^T b(alpha) is +b(alpha(s)).
  const double dVds = dPdt + spec.b(a_s);
  const Vector grad = 2.0 * spec.h.jacobian(x).transpose() * (P.at(s).matrix() * hx);
  return std::abs(dVds + hamiltonian(spec, s, x, grad, a_s));
}

TrajectoryCost cost_of_trajectory(const ProblemSpec& spec, const Trajectory& traj,
                                  const AlphaPolicy& alpha, const RiccatiSolution* P) {
  TrajectoryCost cost;
  if (traj.s.empty()) return cost;
  cost.truncated = traj.cum_cost.back();
  if (P != nullptr) {
    const double s_end = traj.s.back();
    cost.tail = P->at(s_end).quadratic_form(spec.h.forward(traj.xi.back())) -
                alpha.integral([&](double v) { return spec.b(v); }, s_end, kInfinity);
  }
  return cost;
}

PerturbationReport perturbation_study(const ProblemSpec& spec, const RiccatiSolution& P_T,
                                      const AlphaPolicy& alpha, double t, const Vector& x0,
                                      double delta, std::size_t count, std::uint64_t seed) {
  const TimeGrid& grid = P_T.grid();
  const double T = grid.t_end();
  PerturbationReport report;
  report.reference_value = finite_value_from_riccati(spec, P_T, alpha, t, T, x0);
  const TimeGrid sim_grid = TimeGrid::covering(t, T, grid.dt());
  auto feedback = [&](double s, const Vector& x) { return feedback_control(spec, P_T, s, x); };
  const Trajectory base = simulate(spec, feedback, alpha, sim_grid, x0);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Eigen::Index m = spec.dim_control;
  constexpr int kModes = 3;
  report.min_excess = kInfinity;
  for (std::size_t k = 0; k < count; ++k) {
    Matrix amp(m, kModes);
    Matrix phase(m, kModes);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (int j = 0; j < kModes; ++j) {
        amp(r, j) = unit(rng) / kModes;
        phase(r, j) = M_PI * unit(rng);
      }
    }
    const double span = std::max(T - t, 1e-12);
    auto perturbed = [&](double s, const Vector& x) {
      Vector w = Vector::Zero(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        for (int j = 0; j < kModes; ++j) {
          w[r] += amp(r, j) * std::sin(2.0 * M_PI * (j + 1) * (s - t) / span + phase(r, j));
        }
      }
      return Vector(feedback(s, x) + delta * w);
    };
    const Trajectory traj = simulate(spec, perturbed, alpha, sim_grid, x0);
    report.min_excess = std::min(report.min_excess, traj.cum_cost.back() - report.reference_value);
    double gap = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) gap = std::max(gap, (traj.xi[i] - base.xi[i]).norm());
    if (delta > 0.0) report.sensitivity = std::max(report.sensitivity, gap / delta);
    ++report.samples;
  }
  return report;
}

}  // namespace cvsynth
