#pragma once

#include <optional>
#include <vector>

#include "cvsynth/model.hpp"
#include "cvsynth/numerics.hpp"

namespace cvsynth {

/// Record of the horizon-doubling construction of the stabilizing solution.
struct StabilizingCertificate {
  std::vector<double> horizons;  ///< T_k of every sweep, in order
  std::vector<double> gaps;      ///< gap between sweeps k and k-1 on [t, T_eval]; gaps[0] is NaN
  double achieved_gap = 0.0;
  double tol = 0.0;
};

/// P(s) on a uniform grid, with interval derivative pairs for cubic Hermite
/// dense output between nodes.
class RiccatiSolution {
 public:
  enum class Kind { FiniteHorizon, Stabilizing, Prescribed };

  RiccatiSolution() = default;
  RiccatiSolution(Kind kind, TimeGrid grid, std::vector<SymMatrix> values,
                  std::vector<Matrix> left_derivatives, std::vector<Matrix> right_derivatives,
                  AlphaPolicy alpha);

  /// Surrogate P = 0 on the grid (used for open-loop drift studies).
  static RiccatiSolution zero(const TimeGrid& grid, Eigen::Index n);

  Kind kind() const { return kind_; }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<SymMatrix>& values() const { return values_; }
  const SymMatrix& node(std::size_t i) const { return values_.at(i); }
  Eigen::Index dim() const { return values_.empty() ? 0 : values_.front().dim(); }
  const AlphaPolicy& alpha() const { return alpha_; }

  /// P(s) for s in the grid span; exact at nodes. Throws OutOfGrid.
  SymMatrix at(double s) const;

  /// Terminal time T of a finite-horizon solve.
  double horizon() const { return grid_.t_end(); }
  const std::optional<StabilizingCertificate>& certificate() const { return certificate_; }
  void set_certificate(StabilizingCertificate c) { certificate_ = std::move(c); }

  /// Restriction to the first n_steps intervals.
  RiccatiSolution truncated(std::size_t n_steps) const;

 private:
  Kind kind_ = Kind::Prescribed;
  TimeGrid grid_;
  std::vector<SymMatrix> values_;
  std::vector<Matrix> left_;
  std::vector<Matrix> right_;
  AlphaPolicy alpha_;
  std::optional<StabilizingCertificate> certificate_;
};

/// dP/ds = -(A^T P + P A - P B R^{-1} B^T P + Q(s, alpha)).
Matrix riccati_rhs(const ProblemSpec& spec, double s, const Matrix& P, double alpha);

/// Backward RK4 sweep from P(T) = 0 on the grid covering [t, T] with the
/// problem's time step. alpha is frozen per step at the step midpoint.
/// T == t yields the single zero node. Throws NonFiniteState on escape.
RiccatiSolution solve_finite_horizon(const ProblemSpec& spec, const AlphaPolicy& alpha, double t,
                                     double T);
/// Same sweep on an explicit grid ending at T.
RiccatiSolution solve_finite_horizon_on(const ProblemSpec& spec, const AlphaPolicy& alpha,
                                        const TimeGrid& grid);

/// Stabilizing (minimal) solution as the limit of finite-horizon sweeps with
/// horizons growing geometrically by `growth`, stopped when the largest
/// change on [t, T_eval] drops below tol. Throws NoConvergence at grid.t_max.
RiccatiSolution solve_stabilizing(const ProblemSpec& spec, const AlphaPolicy& alpha, double t,
                                  double T_eval, double tol, double growth = 2.0);

/// Stabilizing root of A^T P + P A - P B R^{-1} B^T P + Q = 0 by Newton-Kleinman
/// iteration started from a Bass stabilizing gain. Throws NotStabilizable.
SymMatrix solve_are_constant(const Matrix& A, const Matrix& B, const SymMatrix& R,
                             const SymMatrix& Q, double tol);

/// Solves F X + X F^T = M for X (dense Kronecker formulation, n <= ~32).
Matrix solve_lyapunov(const Matrix& F, const Matrix& M);

struct MonotoneCheck {
  bool ok = false;
  double min_eigenvalue = 0.0;
};

/// lambda_min(P_T2(s_probe) - P_T1(s_probe)) >= -1e-9 for T1 <= T2.
MonotoneCheck check_monotone_in_T(const ProblemSpec& spec, const AlphaPolicy& alpha, double t,
                                  double s_probe, double T1, double T2);

struct StructuralReport {
  bool terminal_zero = false;  ///< meaningful for finite-horizon solutions
  double max_asymmetry = 0.0;
  double min_eigenvalue = 0.0;
  double min_eigenvalue_before_terminal = 0.0;
  bool psd = false;
};

StructuralReport structural_check(const RiccatiSolution& sol);

}  // namespace cvsynth
