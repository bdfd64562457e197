#pragma once

#include <cstddef>
#include <vector>

#include "cvsynth/model.hpp"

namespace cvsynth {

/// Discretized finite-horizon surrogate of the state-constrained problem.
struct DPProblem {
  enum class CostMode { FixedAlpha, SupLagrangian };

  /// State points per axis on the bounding box of Omega; points outside Omega
  /// are excluded from the table (value +inf).
  std::vector<std::size_t> state_resolution;
  double u_max = 1.0;
  /// Control points per axis on [-u_max, u_max].
  std::size_t control_resolution = 21;
  double t0 = 0.0;
  double T = 1.0;
  std::size_t n_steps = 100;
  CostMode mode = CostMode::FixedAlpha;
  AlphaPolicy alpha;
};

/// Largest table (states x time nodes) accepted by the oracle.
inline constexpr std::size_t kMaxDPEntries = 50'000'000;

/// V(s_i, x_j) on the product grid; +inf marks states with no discrete
/// feasible control sequence.
struct DPValueTable {
  std::vector<std::vector<double>> axes;
  TimeGrid grid;
  /// values[stage][flat state index], axis 0 varying fastest.
  std::vector<std::vector<double>> values;
  /// max over transitions of |f_k| dt / dx_k; > 1 raises grid_too_coarse.
  double max_cfl = 0.0;
  bool grid_too_coarse = false;

  std::size_t state_count() const;
  Vector state(std::size_t flat) const;
  /// Multilinear interpolation at stage `stage`; +inf when a corner with
  /// positive weight is infeasible or x leaves the grid box.
  double value(std::size_t stage, const Vector& x) const;
};

/// Backward value iteration V_i(x) = min_u [l dt + V_{i+1}(x + f dt)] with
/// V_N = 0 and explicit Euler transitions. Requires dim_state <= 2.
DPValueTable brute_force_value(const DPProblem& dp, const ProblemSpec& spec, int jobs = 1);

/// States from which some control sequence on the grid stays in Omega over
/// the whole horizon (finite value of the zero-cost table), flat order.
std::vector<bool> oracle_feasible_set(const DPProblem& dp, const ProblemSpec& spec, int jobs = 1);

}  // namespace cvsynth
