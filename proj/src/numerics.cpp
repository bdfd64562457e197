#include "cvsynth/numerics.hpp"

#include <cmath>
#include <limits>

#include "cvsynth/error.hpp"

namespace cvsynth {

TimeGrid::TimeGrid(double t0, double dt, std::size_t n_steps)
    : t0_(t0), dt_(dt), t_end_(t0 + static_cast<double>(n_steps) * dt), n_steps_(n_steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidValue, "time step must be positive");
}

TimeGrid TimeGrid::covering(double t_start, double t_end, double max_dt) {
  if (!(max_dt > 0.0)) fail(ErrorCode::InvalidValue, "time step must be positive");
  if (t_end < t_start) fail(ErrorCode::InvalidValue, "grid end precedes start");
  const double span = t_end - t_start;
  std::size_t n = static_cast<std::size_t>(std::ceil(span / max_dt - 1e-9));
  if (span > 0.0 && n == 0) n = 1;
  TimeGrid grid;
  grid.t0_ = t_start;
  grid.n_steps_ = n;
  grid.dt_ = n == 0 ? max_dt : span / static_cast<double>(n);
  grid.t_end_ = t_end;
  return grid;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
  return out;
}

bool TimeGrid::spans(double s) const {
  const double slack = 1e-9 * dt_;
  return s >= t0_ - slack && s <= t_end_ + slack;
}

std::optional<std::size_t> TimeGrid::node_index(double s, double rel_tol) const {
  if (!spans(s)) return std::nullopt;
  const double k = std::round((s - t0_) / dt_);
  if (k < 0.0 || k > static_cast<double>(n_steps_)) return std::nullopt;
  const auto i = static_cast<std::size_t>(k);
  if (std::abs(node(i) - s) > rel_tol * dt_) return std::nullopt;
  return i;
}

std::pair<std::size_t, double> TimeGrid::locate(double s) const {
  if (n_steps_ == 0) return {0, 0.0};
  double k = std::floor((s - t0_) / dt_);
  k = std::clamp(k, 0.0, static_cast<double>(n_steps_ - 1));
  const auto i = static_cast<std::size_t>(k);
  const double width = node(i + 1) - node(i);
  const double theta = std::clamp((s - node(i)) / width, 0.0, 1.0);
  return {i, theta};
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
  m_ = 0.5 * (m + m.transpose());
}

EigExtremes eig_sym_extremes(const SymMatrix& m) {
  if (m.dim() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

double spectral_abscissa(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues().real().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Vector SampledPath::at(double s) const {
  if (!grid.spans(s)) fail(ErrorCode::OutOfGrid, "dense output requested outside the sampled span");
  if (grid.n_steps() == 0) return values.front();
  const auto [i, theta] = grid.locate(s);
  if (theta == 0.0) return values[i];
  if (theta == 1.0) return values[i + 1];
  const double h = grid.node(i + 1) - grid.node(i);
  return hermite(values[i], values[i + 1], derivatives[i], derivatives[i + 1], h, theta);
}

SampledPath integrate_ode(const VectorRhs& rhs, double t_start, double t_end, const Vector& y0,
                          double max_dt) {
  if (t_start == t_end) fail(ErrorCode::InvalidValue, "integration interval is empty");
  const bool backward = t_end < t_start;
  SampledPath path;
  path.grid = backward ? TimeGrid::covering(t_end, t_start, max_dt)
                       : TimeGrid::covering(t_start, t_end, max_dt);
  const std::size_t n = path.grid.n_steps();
  path.values.assign(n + 1, Vector());
  path.derivatives.assign(n + 1, Vector());

  std::size_t idx = backward ? n : 0;
  path.values[idx] = y0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t next = backward ? idx - 1 : idx + 1;
    const double s = path.grid.node(idx);
    const double h = path.grid.node(next) - s;
    Vector y = rk4_step(rhs, s, path.values[idx], h);
    if (!y.allFinite()) {
      fail(ErrorCode::NonFiniteState, "state became non-finite near t = " + std::to_string(s));
    }
    path.values[next] = std::move(y);
    idx = next;
  }
  for (std::size_t i = 0; i <= n; ++i) path.derivatives[i] = rhs(path.grid.node(i), path.values[i]);
  return path;
}

double simpson_samples(std::span<const double> v, double dt) {
  const std::size_t n = v.empty() ? 0 : v.size() - 1;
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteState, "non-finite integrand sample");
  }
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * dt * (v[0] + v[1]);
  auto simpson = [&](std::size_t begin, std::size_t end) {
    double sum = v[begin] + v[end];
    for (std::size_t i = begin + 1; i < end; ++i) sum += ((i - begin) % 2 == 1 ? 4.0 : 2.0) * v[i];
    return sum * dt / 3.0;
  };
  if (n % 2 == 0) return simpson(0, n);
  // 3/8 rule on the trailing three panels.
  const double tail = 3.0 * dt / 8.0 * (v[n - 3] + 3.0 * v[n - 2] + 3.0 * v[n - 1] + v[n]);
  return (n > 3 ? simpson(0, n - 3) : 0.0) + tail;
}

double quadrature(const std::function<double(double)>& f, double t_start, double t_end,
                  std::size_t n_intervals) {
  if (t_start == t_end) return 0.0;
  if (n_intervals == 0) fail(ErrorCode::InvalidValue, "quadrature needs at least one interval");
  const double dt = (t_end - t_start) / static_cast<double>(n_intervals);
  std::vector<double> samples(n_intervals + 1);
  for (std::size_t i = 0; i <= n_intervals; ++i) {
    samples[i] = f(i == n_intervals ? t_end : t_start + static_cast<double>(i) * dt);
  }
  return simpson_samples(samples, dt);
}

double golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                               double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    // ">=" keeps the left bracket on ties, so the smallest maximizer wins.
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The bracket endpoints may beat the interior when the maximum sits on lo.
  return f(lo) >= f(mid) ? lo : mid;
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                  double step) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += step;
    xm[j] -= step;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return jac;
}

}  // namespace cvsynth
