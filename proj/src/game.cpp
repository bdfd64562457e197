#include "cvsynth/game.hpp"

#include <algorithm>
#include <cmath>

#include "cvsynth/error.hpp"
#include "cvsynth/parallel.hpp"

namespace cvsynth {

double lambda_map(const ProblemSpec& spec, double /*s*/, const Vector& x) {
  return marginal_argmax(spec.a, spec.b, spec.h.forward(x).squaredNorm());
}

ConstantAlphaSweep sup_over_constant_alpha(const ProblemSpec& spec, double t, const Vector& x,
                                           const std::vector<double>& alpha_grid, double window,
                                           double riccati_tol, int jobs) {
  if (!(window > 0.0)) fail(ErrorCode::InvalidValue, "constant-alpha window must be positive");
  ConstantAlphaSweep sweep;
  sweep.entries.resize(alpha_grid.size());
  parallel_for(alpha_grid.size(), jobs, [&](std::size_t k) {
    ConstantAlphaEntry& entry = sweep.entries[k];
    entry.alpha = alpha_grid[k];
    try {
      const AlphaPolicy policy = entry.alpha == 0.0 ? AlphaPolicy::constant(0.0)
                                                    : AlphaPolicy::windowed(entry.alpha, t, t + window);
      const RiccatiSolution P = solve_stabilizing(spec, policy, t, t, riccati_tol);
      entry.value = value_from_riccati(spec, P, policy, t, x);
      entry.ok = true;
    } catch (const Error& e) {
      entry.ok = false;
      entry.value = -kInfinity;
      entry.message = e.what();
    }
  });
  for (const auto& entry : sweep.entries) {
    if (entry.ok && entry.value > sweep.W_lower) {
      sweep.W_lower = entry.value;
      sweep.best_alpha = entry.alpha;
    }
  }
  return sweep;
}

GameSolution solve_coupled(const ProblemSpec& spec, double t, const Vector& x0, const GameOptions& options) {
  if (!(options.tol > 0.0)) fail(ErrorCode::InvalidValue, "game tolerance must be positive");
  if (!(options.relaxation > 0.0 && options.relaxation <= 1.0)) {
    fail(ErrorCode::InvalidValue, "relaxation must lie in (0, 1]");
  }
  if (options.max_iter < 1) fail(ErrorCode::InvalidValue, "max_iter must be >= 1");
  if (!(options.horizon > 0.0)) fail(ErrorCode::InvalidValue, "game horizon must be positive");
  if (!spec.omega.contains(x0, spec.omega.tol_active())) {
    fail(ErrorCode::InfeasibleState, "initial state lies outside Omega");
  }

  const TimeGrid grid = TimeGrid::covering(t, t + options.horizon, spec.grid.dt);
  const std::vector<double> nodes = grid.nodes();
  std::vector<double> values(nodes.size(), 0.0);

  GameSolution sol;
  for (int k = 1; k <= options.max_iter; ++k) {
    AlphaPolicy policy(nodes, values, 0.0);
    RiccatiSolution P = solve_stabilizing(spec, policy, t, grid.t_end(), options.riccati_tol);
    Trajectory xi = simulate_closed_loop(spec, P, policy, t, x0, options.horizon);

    double update = 0.0;
    std::vector<double> next(values.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double target = lambda_map(spec, nodes[i], xi.xi[i]);
      next[i] = (1.0 - options.relaxation) * values[i] + options.relaxation * target;
      // The last node only feeds the tail, which stays 0.
      if (i + 1 < next.size()) update = std::max(update, std::abs(next[i] - values[i]));
    }
    sol.alpha_star = std::move(policy);
    sol.P_star = std::move(P);
    sol.xi_star = std::move(xi);
    sol.iterations = k;
    sol.alpha_update_norm = update;
    sol.update_history.push_back(update);
    values = std::move(next);
    if (update < options.tol) {
      sol.converged = true;
      break;
    }
  }
  sol.W = value_from_riccati(spec, sol.P_star, sol.alpha_star, t, x0);
  sol.min_interior_margin = *std::min_element(sol.xi_star.omega_margin.begin(), sol.xi_star.omega_margin.end());
  return sol;
}

double lambda_lipschitz_estimate(const ProblemSpec& spec, double s,
                                 const std::vector<std::pair<Vector, Vector>>& sample_pairs) {
  double best = 0.0;
  for (const auto& [x, y] : sample_pairs) {
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    best = std::max(best, std::abs(lambda_map(spec, s, x) - lambda_map(spec, s, y)) / dist);
  }
  return best;
}

}  // namespace cvsynth
