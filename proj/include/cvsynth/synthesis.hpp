#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cvsynth/model.hpp"
#include "cvsynth/riccati.hpp"

namespace cvsynth {

/// Sampled trajectory-control pair with the running and accumulated cost.
struct Trajectory {
  std::vector<double> s;
  std::vector<Vector> xi;
  std::vector<Vector> u;
  std::vector<double> alpha;
  std::vector<double> running_cost;
  std::vector<double> cum_cost;
  /// Signed distance-like margin to the boundary of Omega (negative outside).
  std::vector<double> omega_margin;
  /// First exit from Omega, located by linear interpolation of the margin.
  std::optional<double> exit_time;

  bool violated() const { return exit_time.has_value(); }
  std::size_t size() const { return s.size(); }
};

using ControlLaw = std::function<Vector(double, const Vector&)>;

/// u = -R^{-1} B(s)^T P(s) h(x). Throws OutOfGrid.
Vector feedback_control(const ProblemSpec& spec, const RiccatiSolution& P, double s, const Vector& x);

/// RK4 of the state augmented with the accumulated cost on `grid`; alpha is
/// frozen per step at the step midpoint. Throws InfeasibleState when x0 is
/// outside Omega and NonFiniteState on blow-up. Leaving Omega is recorded,
/// not fatal.
Trajectory simulate(const ProblemSpec& spec, const ControlLaw& law, const AlphaPolicy& alpha,
                    const TimeGrid& grid, const Vector& x0);

/// Closed loop under the Riccati feedback on [t, t + T_sim].
Trajectory simulate_closed_loop(const ProblemSpec& spec, const RiccatiSolution& P,
                                const AlphaPolicy& alpha, double t, const Vector& x0, double T_sim);

/// <h(x), P(t) h(x)> - int_t^inf b(alpha). Throws NotIntegrable.
double value_from_riccati(const ProblemSpec& spec, const RiccatiSolution& P, const AlphaPolicy& alpha,
                          double t, const Vector& x);
/// <h(x), P_T(t) h(x)> - int_t^T b(alpha).
double finite_value_from_riccati(const ProblemSpec& spec, const RiccatiSolution& P_T,
                                 const AlphaPolicy& alpha, double t, double T, const Vector& x);

/// inf_u <p, f(s, x, u)> + l(s, x, u, alpha_val), in closed form.
double hamiltonian(const ProblemSpec& spec, double s, const Vector& x, const Vector& p, double alpha_val);

/// |d_s V + H(s, x, grad_x V)| for V = <h, P h> - int_s^T b(alpha), with d_s V by a
/// central difference of width one grid step. Throws OutOfGrid near the ends.
double hjb_residual(const ProblemSpec& spec, const RiccatiSolution& P, const AlphaPolicy& alpha,
                    double s, const Vector& x);

struct TrajectoryCost {
  double truncated = 0.0;
  /// <h(xi_end), P(s_end) h(xi_end)> - int_{s_end}^inf b(alpha); 0 without P.
  double tail = 0.0;
  double total() const { return truncated + tail; }
};

TrajectoryCost cost_of_trajectory(const ProblemSpec& spec, const Trajectory& traj,
                                  const AlphaPolicy& alpha, const RiccatiSolution* P = nullptr);

struct PerturbationReport {
  double reference_value = 0.0;
  /// min over samples of J(u_fb + delta w) - W_T.
  double min_excess = 0.0;
  /// max over samples of sup_s |xi_pert - xi_fb| / delta.
  double sensitivity = 0.0;
  std::size_t samples = 0;
};

/// Finite-horizon cost of `count` perturbed feedback controls u_fb + delta w(s)
/// with random smooth |w| <= 1, compared with the finite-horizon value.
PerturbationReport perturbation_study(const ProblemSpec& spec, const RiccatiSolution& P_T,
                                      const AlphaPolicy& alpha, double t, const Vector& x0,
                                      double delta, std::size_t count, std::uint64_t seed);

}  // namespace cvsynth
