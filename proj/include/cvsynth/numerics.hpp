#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cvsynth {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform time grid s_i = t0 + i*dt, i = 0..n_steps. The last node is stored
/// exactly so that grids built by `covering` end on the requested time.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t0, double dt, std::size_t n_steps);

  /// Smallest uniform grid on [t_start, t_end] with spacing <= max_dt.
  static TimeGrid covering(double t_start, double t_end, double max_dt);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  double t_end() const { return t_end_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t size() const { return n_steps_ + 1; }

  double node(std::size_t i) const { return i == n_steps_ ? t_end_ : t0_ + static_cast<double>(i) * dt_; }
  std::vector<double> nodes() const;

  bool spans(double s) const;
  /// Index of the node equal to s up to rel_tol*dt, if any.
  std::optional<std::size_t> node_index(double s, double rel_tol = 1e-6) const;
  /// Interval [node(i), node(i+1)] containing s and the local coordinate in
  /// [0, 1]. Requires spans(s) and n_steps >= 1.
  std::pair<std::size_t, double> locate(double s) const;

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  double t_end_ = 0.0;
  std::size_t n_steps_ = 0;
};

/// Symmetric matrix; symmetrized on construction so that M == M^T bitwise.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  static SymMatrix zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix scaled_identity(Eigen::Index n, double scale) {
    return SymMatrix(scale * Matrix::Identity(n, n));
  }

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double quadratic_form(const Vector& v) const { return v.dot(m_ * v); }

 private:
  Matrix m_;
};

struct EigExtremes {
  double min;
  double max;
};

EigExtremes eig_sym_extremes(const SymMatrix& m);

/// max Re(lambda) over the spectrum of a general square matrix.
double spectral_abscissa(const Matrix& m);

bool all_finite(const Matrix& m);

/// One classical fourth-order Runge-Kutta step. State must support the usual
/// vector-space expressions (Eigen vectors and matrices do).
template <class State, class Rhs>
State rk4_step(const Rhs& rhs, double t, const State& y, double h) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Cubic Hermite interpolant on an interval of length h at local coordinate theta.
template <class State>
State hermite(const State& y0, const State& y1, const State& d0, const State& d1, double h,
              double theta) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return State(h00 * y0 + (h10 * h) * d0 + h01 * y1 + (h11 * h) * d1);
}

using VectorRhs = std::function<Vector(double, const Vector&)>;

/// Path sampled on a uniform grid with derivative samples for dense output.
struct SampledPath {
  TimeGrid grid;
  std::vector<Vector> values;
  std::vector<Vector> derivatives;

  Vector at(double s) const;
};

/// RK4 on the uniform grid covering [t_start, t_end] with spacing <= max_dt.
/// t_end < t_start integrates backward; the returned samples are always
/// stored in increasing time order. Throws NonFiniteState on overflow/NaN.
SampledPath integrate_ode(const VectorRhs& rhs, double t_start, double t_end, const Vector& y0,
                          double max_dt);

/// Composite Simpson on n_intervals uniform panels of [t_start, t_end]; an odd
/// panel count closes with Simpson's 3/8 rule on the last three panels.
double quadrature(const std::function<double(double)>& f, double t_start, double t_end,
                  std::size_t n_intervals);

/// Same rule applied to samples on a uniform grid with spacing dt.
double simpson_samples(std::span<const double> values, double dt);

/// Golden-section search for the maximizer of a unimodal f on [lo, hi].
double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tol);

/// Central finite-difference Jacobian of f at x.
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                  double step);

}  // namespace cvsynth
