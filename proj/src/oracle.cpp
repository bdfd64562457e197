#include "cvsynth/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "cvsynth/error.hpp"
#include "cvsynth/parallel.hpp"

namespace cvsynth {

namespace {

constexpr double kWeightFloor = 1e-14;

// Product grid with uniform axes; at most two dimensions.
struct GridGeometry {
  std::size_t dims = 0;
  double lo[2] = {0.0, 0.0};
  double hi[2] = {0.0, 0.0};
  double step[2] = {1.0, 1.0};
  std::size_t count[2] = {1, 1};

  explicit GridGeometry(const std::vector<std::vector<double>>& axes) : dims(axes.size()) {
    for (std::size_t k = 0; k < dims; ++k) {
      lo[k] = axes[k].front();
      hi[k] = axes[k].back();
      count[k] = axes[k].size();
      step[k] = (hi[k] - lo[k]) / static_cast<double>(count[k] - 1);
    }
  }

  // Multilinear interpolation; +inf outside the box or when a corner with
  // positive weight is infeasible.
  double interpolate(const std::vector<double>& table, const double* x) const {
    std::size_t index[2] = {0, 0};
    double theta[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < dims; ++k) {
      const double slack = 1e-12 * std::max(1.0, hi[k] - lo[k]);
      if (x[k] < lo[k] - slack || x[k] > hi[k] + slack) return kInfinity;
      const double pos = std::clamp((x[k] - lo[k]) / step[k], 0.0, static_cast<double>(count[k] - 1));
      std::size_t i = static_cast<std::size_t>(pos);
      if (i >= count[k] - 1) i = count[k] - 2;
      index[k] = i;
      theta[k] = pos - static_cast<double>(i);
    }
    double total = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      std::size_t stride = 1;
      for (std::size_t k = 0; k < dims; ++k) {
        const bool upper = (corner >> k) & 1U;
        w *= upper ? theta[k] : 1.0 - theta[k];
        flat += (index[k] + (upper ? 1 : 0)) * stride;
        stride *= count[k];
      }
      if (w <= kWeightFloor) continue;
      const double v = table[flat];
      if (std::isinf(v)) return kInfinity;
      total += w * v;
    }
    return total;
  }
};

std::vector<std::vector<double>> state_axes(const DPProblem& dp, const ProblemSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.dim_state);
  if (n > 2) fail(ErrorCode::InvalidValue, "the DP oracle supports state dimension <= 2");
  if (dp.state_resolution.size() != n) fail(ErrorCode::DimensionMismatch, "one state resolution per axis is required");
  std::vector<std::vector<double>> axes(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t count = dp.state_resolution[k];
    if (count < 2) fail(ErrorCode::InvalidValue, "state resolution must be >= 2");
    const double lo = spec.omega.box_lower()[static_cast<Eigen::Index>(k)];
    const double hi = spec.omega.box_upper()[static_cast<Eigen::Index>(k)];
    axes[k].resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      axes[k][i] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
  }
  return axes;
}

std::vector<Vector> control_grid(const DPProblem& dp, Eigen::Index m) {
  if (m > 2) fail(ErrorCode::InvalidValue, "the DP oracle supports control dimension <= 2");
  if (dp.control_resolution < 1) fail(ErrorCode::InvalidValue, "control resolution must be >= 1");
  if (!(dp.u_max >= 0.0)) fail(ErrorCode::InvalidValue, "u_max must be nonnegative");
  const std::size_t r = dp.control_resolution;
  auto coord = [&](std::size_t i) {
    return r == 1 ? 0.0 : -dp.u_max + 2.0 * dp.u_max * static_cast<double>(i) / static_cast<double>(r - 1);
  };
  std::vector<Vector> grid;
  if (m == 1) {
    for (std::size_t i = 0; i < r; ++i) grid.push_back(Vector::Constant(1, coord(i)));
  } else {
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t i = 0; i < r; ++i) {
        Vector u(2);
        u << coord(i), coord(j);
        grid.push_back(u);
      }
    }
  }
  return grid;
}

// Running cost at u = 0; the control part is r |u|^2 in every mode.
using BaseCost = std::function<double(double, const Vector&)>;

DPValueTable run_dp(const DPProblem& dp, const ProblemSpec& spec, const BaseCost& base_cost, int jobs) {
  if (!(dp.T > dp.t0) || dp.n_steps < 1) fail(ErrorCode::InvalidValue, "DP horizon must be positive");
  DPValueTable table;
  table.axes = state_axes(dp, spec);
  table.grid = TimeGrid(dp.t0, (dp.T - dp.t0) / static_cast<double>(dp.n_steps), dp.n_steps);
  const std::size_t n_states = table.state_count();
  if (n_states * table.grid.size() > kMaxDPEntries) {
    std::ostringstream msg;
    msg << "DP table of " << n_states << " states x " << table.grid.size() << " nodes exceeds " << kMaxDPEntries;
    fail(ErrorCode::InvalidValue, msg.str());
  }
  const std::vector<Vector> controls = control_grid(dp, spec.dim_control);
  const Eigen::Index n = spec.dim_state;
  const GridGeometry geometry(table.axes);
  const Eigen::Index m = spec.dim_control;
  const std::size_t n_controls = controls.size();
  std::vector<double> control_flat;
  for (const Vector& u : controls) control_flat.insert(control_flat.end(), u.data(), u.data() + m);

  std::vector<Vector> states(n_states);
  std::vector<bool> inside(n_states);
  for (std::size_t j = 0; j < n_states; ++j) {
    states[j] = table.state(j);
    inside[j] = spec.omega.contains(states[j], spec.omega.tol_active());
  }

  const std::size_t N = dp.n_steps;
  table.values.assign(N + 1, std::vector<double>(n_states, kInfinity));
  for (std::size_t j = 0; j < n_states; ++j) {
    if (inside[j]) table.values[N][j] = 0.0;
  }
  const double dt = table.grid.dt();
  std::vector<double> cfl(n_states, 0.0);
  for (std::size_t step = N; step-- > 0;) {
    const double s = table.grid.node(step);
    const std::vector<double>& next = table.values[step + 1];
    std::vector<double>& current = table.values[step];
    const Matrix B = spec.B(s);
    const Matrix A = spec.A(s);
    parallel_for(n_states, jobs, [&](std::size_t j) {
      if (!inside[j]) return;
      const Vector& x = states[j];
      const Matrix J_inv = spec.h.jacobian_inverse(x);
      const Vector drift = J_inv * (A * spec.h.forward(x));
      const Matrix G = J_inv * B;
      const double l0 = base_cost(s, x);
      Vector x_next(n);
      double best = kInfinity;
      for (std::size_t c = 0; c < n_controls; ++c) {
        const double* u = &control_flat[c * m];
        double u_sq = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) u_sq += u[r] * u[r];
        for (Eigen::Index k = 0; k < n; ++k) {
          double f = drift[k];
          for (Eigen::Index r = 0; r < m; ++r) f += G(k, r) * u[r];
          cfl[j] = std::max(cfl[j], std::abs(f) * dt / geometry.step[k]);
          x_next[k] = x[k] + dt * f;
        }
        if (!spec.omega.contains(x_next, spec.omega.tol_active())) continue;
        const double tail = geometry.interpolate(next, x_next.data());
        if (std::isinf(tail)) continue;
        best = std::min(best, (l0 + spec.r_scale * u_sq) * dt + tail);
      }
      current[j] = best;
    });
  }
  table.max_cfl = *std::max_element(cfl.begin(), cfl.end());
  table.grid_too_coarse = table.max_cfl > 1.0;
  return table;
}

}  // namespace

std::size_t DPValueTable::state_count() const {
  std::size_t count = 1;
  for (const auto& ax : axes) count *= ax.size();
  return count;
}

Vector DPValueTable::state(std::size_t flat) const {
  Vector x(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t k = 0; k < axes.size(); ++k) {
    x[static_cast<Eigen::Index>(k)] = axes[k][flat % axes[k].size()];
    flat /= axes[k].size();
  }
  return x;
}

double DPValueTable::value(std::size_t stage, const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != axes.size()) fail(ErrorCode::DimensionMismatch, "state dimension differs from the table");
  return GridGeometry(axes).interpolate(values.at(stage), x.data());
}

DPValueTable brute_force_value(const DPProblem& dp, const ProblemSpec& spec, int jobs) {
  if (dp.mode == DPProblem::CostMode::FixedAlpha) {
    // l(s, x, 0, alpha) with the u-part added separately.
    return run_dp(dp, spec, [&](double s, const Vector& x) {
      const double a_s = dp.alpha(s);
      return spec.q_weight(s, a_s) * spec.h.forward(x).squaredNorm() - spec.b(a_s);
    }, jobs);
  }
  return run_dp(dp, spec, [&](double s, const Vector& x) {
    const double g = spec.h.forward(x).squaredNorm();
    return 0.5 * spec.K(s) * g + marginal_sup(spec.a, spec.b, g);
  }, jobs);
}

std::vector<bool> oracle_feasible_set(const DPProblem& dp, const ProblemSpec& spec, int jobs) {
  ProblemSpec zero_cost = spec;
  zero_cost.r_scale = 0.0;
  const DPValueTable table = run_dp(dp, zero_cost, [](double, const Vector&) { return 0.0; }, jobs);
  std::vector<bool> mask(table.state_count());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = std::isfinite(table.values.front()[j]);
  return mask;
}

}  // namespace cvsynth
