#include "cvsynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvsynth/error.hpp"

namespace cvsynth {

// ---------------------------------------------------------------- catalog

MatrixFunction MatrixFunction::constant(Matrix value) {
  if (!value.allFinite()) fail(ErrorCode::InvalidValue, "matrix entries must be finite");
  MatrixFunction f;
  f.base_ = std::move(value);
  f.amplitude_ = Matrix::Zero(f.base_.rows(), f.base_.cols());
  return f;
}

MatrixFunction MatrixFunction::sinusoid(Matrix base, Matrix amplitude, double frequency) {
  if (base.rows() != amplitude.rows() || base.cols() != amplitude.cols()) {
    fail(ErrorCode::DimensionMismatch, "sinusoid base and amplitude shapes differ");
  }
  if (!base.allFinite() || !amplitude.allFinite() || !std::isfinite(frequency)) {
    fail(ErrorCode::InvalidValue, "sinusoid parameters must be finite");
  }
  MatrixFunction f;
  f.base_ = std::move(base);
  f.amplitude_ = std::move(amplitude);
  f.frequency_ = frequency;
  f.sinusoidal_ = true;
  return f;
}

Matrix MatrixFunction::operator()(double s) const {
  if (!sinusoidal_) return base_;
  return base_ + std::sin(frequency_ * s) * amplitude_;
}

double MatrixFunction::norm_bound() const {
  auto spectral = [](const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  };
  return spectral(base_) + (sinusoidal_ ? spectral(amplitude_) : 0.0);
}

WeightFunction WeightFunction::step(double value, double until) {
  if (!(value >= 0.0) || !std::isfinite(value)) fail(ErrorCode::NonPositiveWeight, "K value must be finite and >= 0");
  if (!(until >= 0.0)) fail(ErrorCode::InvalidValue, "K step end must be >= 0");
  WeightFunction w;
  w.kind_ = Kind::Step;
  w.value_ = value;
  w.until_ = until;
  return w;
}

WeightFunction WeightFunction::exponential(double value, double rate) {
  if (!(value >= 0.0) || !std::isfinite(value)) fail(ErrorCode::NonPositiveWeight, "K value must be finite and >= 0");
  if (!(rate > 0.0) || !std::isfinite(rate)) fail(ErrorCode::InvalidValue, "K decay rate must be positive");
  WeightFunction w;
  w.kind_ = Kind::Exponential;
  w.value_ = value;
  w.rate_ = rate;
  return w;
}

double WeightFunction::operator()(double s) const {
  if (kind_ == Kind::Step) return s <= until_ ? value_ : 0.0;
  return value_ * std::exp(-rate_ * s);
}

double WeightFunction::integral(double t0, double t1) const {
  if (t1 <= t0 || value_ == 0.0) return 0.0;
  if (kind_ == Kind::Step) {
    const double end = std::min(t1, until_);
    if (std::isinf(end)) return kInfinity;
    return value_ * std::max(0.0, end - t0);
  }
  const double upper = std::isinf(t1) ? 0.0 : std::exp(-rate_ * t1);
  return value_ / rate_ * (std::exp(-rate_ * t0) - upper);
}

bool WeightFunction::integrable_l1() const {
  if (value_ == 0.0) return true;
  return kind_ == Kind::Exponential || std::isfinite(until_);
}

bool WeightFunction::constant_from(double t0) const {
  if (value_ == 0.0) return true;
  if (kind_ == Kind::Step) return std::isinf(until_) || until_ < t0;
  return false;
}

PowerFunction PowerFunction::power(double coefficient, double exponent) {
  if (!std::isfinite(coefficient)) fail(ErrorCode::InvalidValue, "coefficient must be finite");
  if (coefficient < 0.0) fail(ErrorCode::NonPositiveWeight, "power-function coefficient must be >= 0");
  if (!(exponent >= 1.0) || !std::isfinite(exponent)) fail(ErrorCode::InvalidValue, "power-function exponent must be >= 1");
  PowerFunction f;
  f.coefficient_ = coefficient;
  f.exponent_ = exponent;
  return f;
}

double PowerFunction::operator()(double alpha) const {
  if (alpha <= 0.0 || coefficient_ == 0.0) return 0.0;
  return coefficient_ * std::pow(alpha, exponent_);
}

double PowerFunction::derivative(double alpha) const {
  if (coefficient_ == 0.0) return 0.0;
  if (alpha <= 0.0) return exponent_ == 1.0 ? coefficient_ : 0.0;
  return coefficient_ * exponent_ * std::pow(alpha, exponent_ - 1.0);
}

// ---------------------------------------------------------------- h

DiffeoMap DiffeoMap::identity(Eigen::Index n) {
  DiffeoMap h;
  h.kind_ = Kind::Identity;
  h.dim_ = n;
  return h;
}

DiffeoMap DiffeoMap::linear(Matrix m) {
  if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::DimensionMismatch, "linear h needs a nonempty square matrix");
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) fail(ErrorCode::SingularJacobian, "linear h matrix is singular");
  DiffeoMap h;
  h.kind_ = Kind::Linear;
  h.dim_ = m.rows();
  h.matrix_inverse_ = lu.inverse();
  h.matrix_ = std::move(m);
  return h;
}

DiffeoMap DiffeoMap::odd_cubic(Eigen::Index n, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorCode::InvalidValue, "cubic h needs beta >= 0");
  DiffeoMap h;
  h.kind_ = Kind::OddCubic;
  h.dim_ = n;
  h.beta_ = beta;
  return h;
}

DiffeoMap DiffeoMap::scaled(double factor) const {
  if (!(factor > 0.0)) fail(ErrorCode::InvalidValue, "h scale must be positive");
  DiffeoMap h = *this;
  h.scale_ *= factor;
  return h;
}

std::string_view DiffeoMap::variant_name() const {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::Linear: return "linear";
    case Kind::OddCubic: return "odd_cubic";
  }
  return "identity";
}

Vector DiffeoMap::forward(const Vector& x) const {
  if (x.size() != dim_) fail(ErrorCode::DimensionMismatch, "h applied to a vector of wrong dimension");
  switch (kind_) {
    case Kind::Identity: return scale_ * x;
    case Kind::Linear: return scale_ * (matrix_ * x);
    case Kind::OddCubic: return scale_ * (x.array() + beta_ * x.array().cube()).matrix();
  }
  return x;
}

Matrix DiffeoMap::jacobian(const Vector& x) const {
  if (x.size() != dim_) fail(ErrorCode::DimensionMismatch, "grad h at a vector of wrong dimension");
  switch (kind_) {
    case Kind::Identity: return scale_ * Matrix::Identity(dim_, dim_);
    case Kind::Linear: return scale_ * matrix_;
    case Kind::OddCubic: return scale_ * (1.0 + 3.0 * beta_ * x.array().square()).matrix().asDiagonal();
  }
  return Matrix();
}

Matrix DiffeoMap::jacobian_inverse(const Vector& x) const {
  if (x.size() != dim_) fail(ErrorCode::DimensionMismatch, "grad h at a vector of wrong dimension");
  switch (kind_) {
    case Kind::Identity: return Matrix::Identity(dim_, dim_) / scale_;
    case Kind::Linear: return matrix_inverse_ / scale_;
    case Kind::OddCubic: {
      const Vector d = 1.0 + 3.0 * beta_ * x.array().square();
      if ((d.array() == 0.0).any()) fail(ErrorCode::SingularJacobian, "cubic h Jacobian is singular");
      return (d.cwiseInverse() / scale_).asDiagonal();
    }
  }
  return Matrix();
}

Vector DiffeoMap::inverse(const Vector& y_scaled) const {
  if (y_scaled.size() != dim_) fail(ErrorCode::DimensionMismatch, "h inverse of a vector of wrong dimension");
  const Vector y = y_scaled / scale_;
  switch (kind_) {
    case Kind::Identity: return y;
    case Kind::Linear: return matrix_inverse_ * y;
    case Kind::OddCubic: {
      if (beta_ == 0.0) return y;
      Vector x(dim_);
      for (Eigen::Index i = 0; i < dim_; ++i) {
        // Cardano for x^3 + x/beta - y/beta = 0 (one real root), then Newton polish.
        const double p = 1.0 / beta_;
        const double q = -y[i] / beta_;
        const double disc = std::sqrt(0.25 * q * q + p * p * p / 27.0);
        double r = std::cbrt(-0.5 * q + disc) + std::cbrt(-0.5 * q - disc);
        for (int it = 0; it < 3; ++it) {
          const double f = r + beta_ * r * r * r - y[i];
          r -= f / (1.0 + 3.0 * beta_ * r * r);
        }
        x[i] = r;
      }
      return x;
    }
  }
  return y;
}

// ---------------------------------------------------------------- alpha

AlphaPolicy::AlphaPolicy(std::vector<double> nodes, std::vector<double> values, double tail)
    : nodes_(std::move(nodes)), values_(std::move(values)), tail_(tail) {
  if (nodes_.empty() || nodes_.size() != values_.size()) {
    fail(ErrorCode::DimensionMismatch, "alpha policy needs one value per node");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) fail(ErrorCode::InvalidValue, "alpha nodes must be strictly increasing");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::NegativeAlpha, "alpha values must be finite and >= 0");
  }
  if (!(tail_ >= 0.0) || !std::isfinite(tail_)) fail(ErrorCode::NegativeAlpha, "alpha tail must be finite and >= 0");
}

AlphaPolicy AlphaPolicy::windowed(double value, double start, double end) {
  if (!(end > start)) fail(ErrorCode::InvalidValue, "alpha window must have positive length");
  return AlphaPolicy({start, end}, {value, 0.0}, 0.0);
}

double AlphaPolicy::operator()(double s) const {
  if (s >= nodes_.back()) return tail_;
  if (s < nodes_.front()) return values_.front();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  return values_[static_cast<std::size_t>(it - nodes_.begin()) - 1];
}

double AlphaPolicy::integral(const std::function<double(double)>& F, double t0, double t1) const {
  if (!(t1 > t0)) return 0.0;
  double total = 0.0;
  // Leading constant piece before the first node.
  if (t0 < nodes_.front()) total += F(values_.front()) * (std::min(t1, nodes_.front()) - t0);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double lo = std::max(t0, nodes_[i]);
    const double hi = std::min(t1, nodes_[i + 1]);
    if (hi > lo) total += F(values_[i]) * (hi - lo);
  }
  const double lo = std::max(t0, nodes_.back());
  if (t1 > lo) {
    const double f_tail = F(tail_);
    if (std::isinf(t1)) {
      if (f_tail != 0.0) fail(ErrorCode::NotIntegrable, "integrand is nonzero on the unbounded alpha tail");
    } else {
      total += f_tail * (t1 - lo);
    }
  }
  return total;
}

double AlphaPolicy::max_value() const {
  return std::max(tail_, *std::max_element(values_.begin(), values_.end()));
}

bool AlphaPolicy::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == tail_; });
}

// ---------------------------------------------------------------- problem

void validate(const ProblemSpec& spec) {
  const auto n = spec.dim_state;
  const auto m = spec.dim_control;
  if (n < 1 || m < 1) fail(ErrorCode::DimensionMismatch, "dims: state and control dimensions must be >= 1");
  if (spec.A.rows() != n || spec.A.cols() != n) fail(ErrorCode::DimensionMismatch, "A must be n x n");
  if (spec.B.rows() != n || spec.B.cols() != m) fail(ErrorCode::DimensionMismatch, "B must be n x m");
  if (spec.h.dim() != n) fail(ErrorCode::DimensionMismatch, "h dimension differs from the state dimension");
  if (spec.omega.dim() != n) fail(ErrorCode::DimensionMismatch, "omega dimension differs from the state dimension");
  if (spec.r_scale != 0.5) fail(ErrorCode::NonconformingWeight, "R must equal I/2");

  const auto& a = spec.a;
  const auto& b = spec.b;
  if (!a.is_zero() && (b.is_zero() || b.exponent() <= a.exponent())) {
    fail(ErrorCode::GrowthViolation, "b must grow strictly faster than a (q > p)");
  }

  const auto& g = spec.grid;
  if (!(g.dt > 0.0) || !std::isfinite(g.dt)) fail(ErrorCode::InvalidValue, "grid.dt must be positive");
  if (!(g.horizon > 0.0)) fail(ErrorCode::InvalidValue, "grid.horizon must be positive");
  if (!(g.t_max > g.t0 + g.horizon)) fail(ErrorCode::InvalidValue, "grid.T_max must exceed t0 + horizon");

  // Declared ||B||_inf must dominate sampled norms; Q >= 0 at the same samples.
  const TimeGrid probe = TimeGrid::covering(g.t0, g.t_max, std::max(g.dt, (g.t_max - g.t0) / 4096.0));
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double s = probe.node(i);
    Eigen::JacobiSVD<Matrix> svd(spec.B(s));
    if (svd.singularValues()(0) > spec.b_norm_bound * (1.0 + 1e-12)) {
      fail(ErrorCode::InvalidValue, "B.norm_bound is below ||B(s)|| at s = " + std::to_string(s));
    }
    if (!(spec.K(s) >= 0.0)) fail(ErrorCode::NonPositiveWeight, "K(s) < 0");
  }
}

Vector eval_dynamics(const ProblemSpec& spec, double s, const Vector& x, const Vector& u) {
  if (u.size() != spec.dim_control) fail(ErrorCode::DimensionMismatch, "control has wrong dimension");
  const Vector rhs = spec.A(s) * spec.h.forward(x) + spec.B(s) * u;
  return spec.h.jacobian_inverse(x) * rhs;
}

double eval_lagrangian(const ProblemSpec& spec, double s, const Vector& x, const Vector& u,
                       double alpha) {
  if (alpha < 0.0) fail(ErrorCode::NegativeAlpha, "alpha must be >= 0");
  const double g = spec.h.forward(x).squaredNorm();
  return spec.q_weight(s, alpha) * g + spec.r_scale * u.squaredNorm() - spec.b(alpha);
}

double eval_sup_lagrangian(const ProblemSpec& spec, double s, const Vector& x, const Vector& u) {
  const double g = spec.h.forward(x).squaredNorm();
  return 0.5 * spec.K(s) * g + spec.r_scale * u.squaredNorm() + marginal_sup(spec.a, spec.b, g);
}

double marginal_argmax(const PowerFunction& a, const PowerFunction& b, double g) {
  if (g < 0.0) fail(ErrorCode::InvalidValue, "marginal weight g must be >= 0");
  if (a.is_zero() || g == 0.0) return 0.0;
  const double cg = a.coefficient() * g;
  const double p = a.exponent();
  const double q = b.exponent();
  if (b.is_zero() || q < p) fail(ErrorCode::UnboundedSup, "a(beta) g - b(beta) is unbounded above");
  if (q == p) {
    if (cg > b.coefficient()) fail(ErrorCode::UnboundedSup, "a(beta) g - b(beta) is unbounded above");
    return 0.0;
  }
  // Stationarity c p g beta^{p-1} = d q beta^{q-1}.
  return std::pow(cg * p / (b.coefficient() * q), 1.0 / (q - p));
}

double marginal_argmax_numeric(const PowerFunction& a, const PowerFunction& b, double g,
                               double tol) {
  if (a.is_zero() || g == 0.0) return 0.0;
  const double p = a.exponent();
  const double q = b.exponent();
  if (b.is_zero() || q <= p) fail(ErrorCode::UnboundedSup, "a(beta) g - b(beta) is unbounded above");
  // The objective is negative beyond (c g / d)^{1/(q-p)}.
  const double hi = std::pow(a.coefficient() * g / b.coefficient(), 1.0 / (q - p)) + 1.0;
  return golden_section_maximize([&](double beta) { return a(beta) * g - b(beta); }, 0.0, hi, tol);
}

double marginal_sup(const PowerFunction& a, const PowerFunction& b, double g) {
  const double beta = marginal_argmax(a, b, g);
  return a(beta) * g - b(beta);
}

}  // namespace cvsynth
