#include "cvsynth/riccati.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cvsynth/error.hpp"

namespace cvsynth {

RiccatiSolution::RiccatiSolution(Kind kind, TimeGrid grid, std::vector<SymMatrix> values,
                                 std::vector<Matrix> left_derivatives,
                                 std::vector<Matrix> right_derivatives, AlphaPolicy alpha)
    : kind_(kind),
      grid_(grid),
      values_(std::move(values)),
      left_(std::move(left_derivatives)),
      right_(std::move(right_derivatives)),
      alpha_(std::move(alpha)) {
  if (values_.size() != grid_.size() || left_.size() != grid_.n_steps() || right_.size() != grid_.n_steps()) {
    fail(ErrorCode::DimensionMismatch, "Riccati samples do not match the grid");
  }
}

RiccatiSolution RiccatiSolution::zero(const TimeGrid& grid, Eigen::Index n) {
  std::vector<SymMatrix> values(grid.size(), SymMatrix::zero(n));
  std::vector<Matrix> d(grid.n_steps(), Matrix::Zero(n, n));
  return RiccatiSolution(Kind::Prescribed, grid, std::move(values), d, d, AlphaPolicy());
}

SymMatrix RiccatiSolution::at(double s) const {
  if (!grid_.spans(s)) {
    fail(ErrorCode::OutOfGrid, "P requested at s = " + std::to_string(s) + " outside [" +
                                   std::to_string(grid_.t0()) + ", " + std::to_string(grid_.t_end()) + "]");
  }
  if (grid_.n_steps() == 0) return values_.front();
  const auto [i, theta] = grid_.locate(s);
  if (theta == 0.0) return values_[i];
  if (theta == 1.0) return values_[i + 1];
  const double h = grid_.node(i + 1) - grid_.node(i);
  return SymMatrix(hermite(values_[i].matrix(), values_[i + 1].matrix(), left_[i], right_[i], h, theta));
}

RiccatiSolution RiccatiSolution::truncated(std::size_t n_steps) const {
  if (n_steps > grid_.n_steps()) fail(ErrorCode::OutOfGrid, "truncation beyond the grid");
  TimeGrid grid(grid_.t0(), grid_.dt(), n_steps);
  std::vector<SymMatrix> values(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n_steps + 1));
  std::vector<Matrix> left(left_.begin(), left_.begin() + static_cast<std::ptrdiff_t>(n_steps));
  std::vector<Matrix> right(right_.begin(), right_.begin() + static_cast<std::ptrdiff_t>(n_steps));
  RiccatiSolution out(kind_, grid, std::move(values), std::move(left), std::move(right), alpha_);
  out.certificate_ = certificate_;
  return out;
}

Matrix riccati_rhs(const ProblemSpec& spec, double s, const Matrix& P, double alpha) {
  const Matrix A = spec.A(s);
  const Matrix B = spec.B(s);
  const Matrix PB = P * B;
  const double q = spec.q_weight(s, alpha);
  Matrix rhs = A.transpose() * P + P * A - spec.r_inverse_scale() * PB * PB.transpose();
  rhs.diagonal().array() += q;
  return -rhs;
}

namespace {

double step_alpha(const AlphaPolicy& alpha, const TimeGrid& grid, std::size_t i) {
  return alpha(0.5 * (grid.node(i) + grid.node(i + 1)));
}

struct Sweep {
  std::vector<SymMatrix> values;
};

Sweep backward_sweep(const ProblemSpec& spec, const AlphaPolicy& alpha, const TimeGrid& grid) {
  const Eigen::Index n = spec.dim_state;
  Sweep sweep;
  sweep.values.assign(grid.size(), SymMatrix());
  sweep.values[grid.n_steps()] = SymMatrix::zero(n);
  for (std::size_t k = grid.n_steps(); k > 0; --k) {
    const std::size_t i = k - 1;
    const double a = step_alpha(alpha, grid, i);
    auto rhs = [&](double s, const Matrix& P) { return riccati_rhs(spec, s, P, a); };
    const double s = grid.node(k);
    const double h = grid.node(i) - s;
    Matrix next = rk4_step(rhs, s, sweep.values[k].matrix(), h);
    if (!next.allFinite()) {
      fail(ErrorCode::NonFiniteState, "Riccati finite escape near s = " + std::to_string(grid.node(i)));
    }
    sweep.values[i] = SymMatrix(next);
  }
  return sweep;
}

RiccatiSolution assemble(const ProblemSpec& spec, const AlphaPolicy& alpha, const TimeGrid& grid,
                         std::vector<SymMatrix> values, RiccatiSolution::Kind kind) {
  std::vector<Matrix> left(grid.n_steps());
  std::vector<Matrix> right(grid.n_steps());
  for (std::size_t i = 0; i < grid.n_steps(); ++i) {
    const double a = step_alpha(alpha, grid, i);
    left[i] = riccati_rhs(spec, grid.node(i), values[i].matrix(), a);
    right[i] = riccati_rhs(spec, grid.node(i + 1), values[i + 1].matrix(), a);
  }
  return RiccatiSolution(kind, grid, std::move(values), std::move(left), std::move(right), alpha);
}

}  // namespace

RiccatiSolution solve_finite_horizon_on(const ProblemSpec& spec, const AlphaPolicy& alpha,
                                        const TimeGrid& grid) {
  Sweep sweep = backward_sweep(spec, alpha, grid);
  return assemble(spec, alpha, grid, std::move(sweep.values), RiccatiSolution::Kind::FiniteHorizon);
}

RiccatiSolution solve_finite_horizon(const ProblemSpec& spec, const AlphaPolicy& alpha, double t,
                                     double T) {
  if (T < t) fail(ErrorCode::InvalidValue, "finite horizon needs T >= t");
  if (T == t) return solve_finite_horizon_on(spec, alpha, TimeGrid(t, spec.grid.dt, 0));
  return solve_finite_horizon_on(spec, alpha, TimeGrid::covering(t, T, spec.grid.dt));
}

RiccatiSolution solve_stabilizing(const ProblemSpec& spec, const AlphaPolicy& alpha, double t,
                                  double T_eval, double tol, double growth) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidValue, "stabilizing tolerance must be positive");
  if (!(growth > 1.0)) fail(ErrorCode::InvalidValue, "horizon growth factor must exceed 1");
  if (T_eval < t) fail(ErrorCode::InvalidValue, "T_eval must be >= t");

  const TimeGrid eval_grid = T_eval == t ? TimeGrid(t, spec.grid.dt, 0) : TimeGrid::covering(t, T_eval, spec.grid.dt);
  const double dt = eval_grid.dt();
  const std::size_t n_eval = eval_grid.n_steps();
  const auto max_steps = static_cast<std::size_t>(std::floor((spec.grid.t_max - t) / dt + 1e-9));
  if (max_steps <= n_eval) fail(ErrorCode::NoConvergence, "T_max leaves no room beyond T_eval");

  std::size_t steps = std::max<std::size_t>(2 * n_eval, static_cast<std::size_t>(std::ceil(1.0 / dt)));
  steps = std::min(steps, max_steps);

  StabilizingCertificate cert;
  cert.tol = tol;
  std::vector<SymMatrix> previous;
  std::vector<SymMatrix> current;
  while (true) {
    const TimeGrid grid(t, dt, steps);
    current = backward_sweep(spec, alpha, grid).values;
    cert.horizons.push_back(grid.t_end());
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (!previous.empty()) {
      gap = 0.0;
      for (std::size_t i = 0; i <= n_eval; ++i) {
        gap = std::max(gap, (current[i].matrix() - previous[i].matrix()).norm());
      }
    }
    cert.gaps.push_back(gap);
    if (!previous.empty() && gap < tol) {
      cert.achieved_gap = gap;
      TimeGrid full(t, dt, steps);
      RiccatiSolution sol = assemble(spec, alpha, full, std::move(current), RiccatiSolution::Kind::Stabilizing);
      RiccatiSolution out = sol.truncated(n_eval);
      out.set_certificate(cert);
      return out;
    }
    if (steps >= max_steps) {
      std::ostringstream msg;
      msg << "stabilizing sweep gap " << gap << " not below " << tol << " at horizon " << grid.t_end()
          << " (T_max reached)";
      fail(ErrorCode::NoConvergence, msg.str());
    }
    previous = std::move(current);
    steps = std::min(max_steps, static_cast<std::size_t>(std::ceil(growth * static_cast<double>(steps))));
  }
}

Matrix solve_lyapunov(const Matrix& F, const Matrix& M) {
  const Eigen::Index n = F.rows();
  const Matrix I = Matrix::Identity(n, n);
  // vec(F X) = (I kron F) vec X, vec(X F^T) = (F kron I) vec X.
  Matrix op = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      op.block(i * n, j * n, n, n) += I(i, j) * F;
      op.block(i * n, j * n, n, n) += F(i, j) * I;
    }
  }
  Eigen::FullPivLU<Matrix> lu(op);
  if (!lu.isInvertible()) fail(ErrorCode::NotStabilizable, "Lyapunov operator is singular");
  const Vector x = lu.solve(Eigen::Map<const Vector>(M.data(), n * n));
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

SymMatrix solve_are_constant(const Matrix& A, const Matrix& B, const SymMatrix& R,
                             const SymMatrix& Q, double tol) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || R.dim() != B.cols() || Q.dim() != n) {
    fail(ErrorCode::DimensionMismatch, "ARE operand shapes are inconsistent");
  }
  const Matrix R_inv = R.matrix().inverse();
  const Matrix S = B * R_inv * B.transpose();

  Matrix gain = Matrix::Zero(B.cols(), n);
  if (spectral_abscissa(A) >= 0.0) {
    // Bass: (A + beta I) Z + Z (A + beta I)^T = 2 B B^T, K0 = B^T Z^{-1}.
    const double beta = A.norm() + 1.0;
    const Matrix shifted = A + beta * Matrix::Identity(n, n);
    const Matrix Z = solve_lyapunov(shifted, 2.0 * B * B.transpose());
    Eigen::FullPivLU<Matrix> lu(Z);
    if (!lu.isInvertible()) fail(ErrorCode::NotStabilizable, "(A, B) is not controllable; no Bass initial gain");
    gain = B.transpose() * lu.inverse();
    if (spectral_abscissa(A - B * gain) >= 0.0) fail(ErrorCode::NotStabilizable, "initial gain does not stabilize");
  }

  Matrix P = Matrix::Zero(n, n);
  for (int it = 0; it < 200; ++it) {
    const Matrix closed = A - B * gain;
    const Matrix rhs = -(Q.matrix() + gain.transpose() * R.matrix() * gain);
    const Matrix next = solve_lyapunov(closed.transpose(), rhs);
    const double change = (next - P).norm();
    P = 0.5 * (next + next.transpose());
    gain = R_inv * B.transpose() * P;
    if (change <= 1e-14 * (1.0 + P.norm())) break;
  }
  const Matrix residual = A.transpose() * P + P * A - P * S * P + Q.matrix();
  if (!P.allFinite() || residual.norm() > tol) {
    fail(ErrorCode::NotStabilizable, "Newton-Kleinman residual " + std::to_string(residual.norm()) + " exceeds tolerance");
  }
  if (spectral_abscissa(A - S * P) >= 0.0) fail(ErrorCode::NotStabilizable, "closed loop is not Hurwitz");
  return SymMatrix(P);
}

MonotoneCheck check_monotone_in_T(const ProblemSpec& spec, const AlphaPolicy& alpha, double t,
                                  double s_probe, double T1, double T2) {
  if (T2 < T1) fail(ErrorCode::InvalidValue, "monotonicity check needs T1 <= T2");
  const RiccatiSolution p1 = solve_finite_horizon(spec, alpha, t, T1);
  const RiccatiSolution p2 = solve_finite_horizon(spec, alpha, t, T2);
  const SymMatrix diff(p2.at(s_probe).matrix() - p1.at(s_probe).matrix());
  MonotoneCheck out;
  out.min_eigenvalue = eig_sym_extremes(diff).min;
  out.ok = out.min_eigenvalue >= -1e-9;
  return out;
}

StructuralReport structural_check(const RiccatiSolution& sol) {
  StructuralReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  r.min_eigenvalue_before_terminal = std::numeric_limits<double>::infinity();
  const auto& values = sol.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Matrix& P = values[i].matrix();
    r.max_asymmetry = std::max(r.max_asymmetry, (P - P.transpose()).cwiseAbs().maxCoeff());
    const double lo = eig_sym_extremes(values[i]).min;
    r.min_eigenvalue = std::min(r.min_eigenvalue, lo);
    if (i + 1 < values.size()) r.min_eigenvalue_before_terminal = std::min(r.min_eigenvalue_before_terminal, lo);
  }
  r.terminal_zero = !values.empty() && (values.back().matrix().array() == 0.0).all();
  r.psd = r.min_eigenvalue >= -1e-9;
  return r;
}

}  // namespace cvsynth
