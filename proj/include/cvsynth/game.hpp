#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cvsynth/model.hpp"
#include "cvsynth/riccati.hpp"
#include "cvsynth/synthesis.hpp"

namespace cvsynth {

/// Smallest maximizer of beta -> a(beta) |h(x)|^2 - b(beta) over beta >= 0.
double lambda_map(const ProblemSpec& spec, double s, const Vector& x);

struct ConstantAlphaEntry {
  double alpha = 0.0;
  double value = 0.0;
  bool ok = false;
  std::string message;
};

struct ConstantAlphaSweep {
  /// Largest value over the successful entries (a lower bound for W).
  double W_lower = -kInfinity;
  double best_alpha = 0.0;
  std::vector<ConstantAlphaEntry> entries;
};

/// Values of the policies equal to c on [t, t + window) and 0 afterwards, one
/// per grid entry. A positive constant held forever has value -inf whenever
/// b(c) > 0, so the window keeps every member finite. Entries whose
/// stabilizing solve fails are kept with ok = false.
ConstantAlphaSweep sup_over_constant_alpha(const ProblemSpec& spec, double t, const Vector& x,
                                           const std::vector<double>& alpha_grid, double window,
                                           double riccati_tol = 1e-10, int jobs = 1);

struct GameOptions {
  double tol = 1e-6;
  int max_iter = 50;
  double relaxation = 0.5;
  /// Length of the simulated horizon carrying alpha; alpha is 0 after it.
  double horizon = 10.0;
  double riccati_tol = 1e-10;
};

struct GameSolution {
  AlphaPolicy alpha_star;
  RiccatiSolution P_star;
  Trajectory xi_star;
  double W = 0.0;
  int iterations = 0;
  double alpha_update_norm = 0.0;
  std::vector<double> update_history;
  bool converged = false;
  /// Smallest Omega margin along xi*; interior-trajectory probe.
  double min_interior_margin = 0.0;
};

/// Relaxed Picard iteration on alpha for the coupled Riccati / closed-loop
/// system, started from alpha = 0. The returned triple is consistent: P* and
/// xi* are computed from alpha*. `converged` is false when max_iter is hit.
GameSolution solve_coupled(const ProblemSpec& spec, double t, const Vector& x0,
                           const GameOptions& options = {});

/// max over pairs of |Lambda(s, x) - Lambda(s, y)| / |x - y|.
double lambda_lipschitz_estimate(const ProblemSpec& spec, double s,
                                 const std::vector<std::pair<Vector, Vector>>& sample_pairs);

}  // namespace cvsynth
