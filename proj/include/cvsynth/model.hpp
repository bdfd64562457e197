#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "cvsynth/constraint_set.hpp"
#include "cvsynth/numerics.hpp"

namespace cvsynth {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Time-dependent matrix from the catalog: constant M0 or M0 + M1 sin(w s).
class MatrixFunction {
 public:
  MatrixFunction() = default;
  static MatrixFunction constant(Matrix value);
  static MatrixFunction sinusoid(Matrix base, Matrix amplitude, double frequency);

  Matrix operator()(double s) const;
  Eigen::Index rows() const { return base_.rows(); }
  Eigen::Index cols() const { return base_.cols(); }
  bool time_invariant() const { return !sinusoidal_; }
  std::string_view variant_name() const { return sinusoidal_ ? "sinusoid" : "constant"; }
  /// Upper bound of sup_s ||M(s)||_2 from the triangle inequality.
  double norm_bound() const;

 private:
  Matrix base_;
  Matrix amplitude_;
  double frequency_ = 0.0;
  bool sinusoidal_ = false;
};

/// State weight K(s) >= 0: K0 on [0, until] and 0 afterwards, or K0 e^{-rate s}.
class WeightFunction {
 public:
  enum class Kind { Step, Exponential };

  WeightFunction() = default;
  static WeightFunction step(double value, double until = kInfinity);
  static WeightFunction exponential(double value, double rate);

  double operator()(double s) const;
  /// Closed-form integral over [t0, t1]; t1 may be +inf (returns +inf when the
  /// weight is not integrable).
  double integral(double t0, double t1) const;
  /// Symbolic integrability on the half-line.
  bool integrable_l1() const;
  bool integrable_l2() const { return integrable_l1(); }
  /// Constant on [t0, inf).
  bool constant_from(double t0) const;
  bool is_zero() const { return value_ == 0.0; }
  Kind kind() const { return kind_; }
  std::string_view variant_name() const { return kind_ == Kind::Step ? "step" : "exponential"; }

 private:
  Kind kind_ = Kind::Step;
  double value_ = 0.0;
  double until_ = kInfinity;
  double rate_ = 0.0;
};

/// c * alpha^p on alpha >= 0 (the linear variant is p = 1).
class PowerFunction {
 public:
  PowerFunction() = default;
  static PowerFunction linear(double coefficient) { return power(coefficient, 1.0); }
  static PowerFunction power(double coefficient, double exponent);

  double operator()(double alpha) const;
  double derivative(double alpha) const;
  double coefficient() const { return coefficient_; }
  double exponent() const { return exponent_; }
  bool is_zero() const { return coefficient_ == 0.0; }

 private:
  double coefficient_ = 0.0;
  double exponent_ = 1.0;
};

/// State diffeomorphism h: identity, invertible linear map, or the
/// componentwise odd cubic x_i -> x_i + beta x_i^3.
class DiffeoMap {
 public:
  enum class Kind { Identity, Linear, OddCubic };

  DiffeoMap() = default;
  static DiffeoMap identity(Eigen::Index n);
  static DiffeoMap linear(Matrix m);
  static DiffeoMap odd_cubic(Eigen::Index n, double beta);

  Vector forward(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;
  Matrix jacobian_inverse(const Vector& x) const;
  Vector inverse(const Vector& y) const;

  /// Scaled copy x -> factor * h(x).
  DiffeoMap scaled(double factor) const;

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  std::string_view variant_name() const;

 private:
  Kind kind_ = Kind::Identity;
  Eigen::Index dim_ = 0;
  Matrix matrix_;
  Matrix matrix_inverse_;
  double beta_ = 0.0;
  double scale_ = 1.0;
};

/// Outer-player policy alpha(s) >= 0, piecewise constant: values[i] on
/// [nodes[i], nodes[i+1]), values[0] before nodes[0], and `tail` from the last
/// node on.
class AlphaPolicy {
 public:
  AlphaPolicy() : AlphaPolicy({0.0}, {0.0}, 0.0) {}
  AlphaPolicy(std::vector<double> nodes, std::vector<double> values, double tail);

  static AlphaPolicy constant(double value) { return AlphaPolicy({0.0}, {value}, value); }
  /// value on [start, end), zero elsewhere after start.
  static AlphaPolicy windowed(double value, double start, double end);

  double operator()(double s) const;
  /// Exact integral of F(alpha(s)) over [t0, t1]; t1 may be +inf, in which
  /// case NotIntegrable is thrown unless F(tail) == 0.
  double integral(const std::function<double(double)>& F, double t0, double t1) const;

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  double tail() const { return tail_; }
  double max_value() const;
  bool is_constant() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  double tail_ = 0.0;
};

struct GridSpec {
  double t0 = 0.0;
  double dt = 0.01;
  /// Evaluation / simulation horizon length measured from t0.
  double horizon = 10.0;
  /// Largest admissible time for horizon-doubling sweeps.
  double t_max = 400.0;
};

/// Structured problem: dynamics grad h(x)^{-1}(A(s) h(x) + B(s) u) and running
/// cost (K(s)/2 + a(alpha)) |h(x)|^2 + <u, R u> - b(alpha) with R = I/2.
struct ProblemSpec {
  Eigen::Index dim_state = 0;
  Eigen::Index dim_control = 0;
  MatrixFunction A;
  MatrixFunction B;
  double b_norm_bound = 0.0;
  WeightFunction K;
  PowerFunction a;
  PowerFunction b;
  double r_scale = 0.5;
  DiffeoMap h;
  ConstraintSet omega;
  GridSpec grid;

  SymMatrix R() const { return SymMatrix::scaled_identity(dim_control, r_scale); }
  double r_inverse_scale() const { return 1.0 / r_scale; }
  /// Scalar multiplier of the identity in Q(s, alpha).
  double q_weight(double s, double alpha) const { return 0.5 * K(s) + a(alpha); }
  /// True when A, B, K are constant on [t0, inf).
  bool time_invariant_from(double t0) const {
    return A.time_invariant() && B.time_invariant() && K.constant_from(t0);
  }
};

/// Checks every structural hypothesis; throws a configuration Error.
void validate(const ProblemSpec& spec);

Vector eval_dynamics(const ProblemSpec& spec, double s, const Vector& x, const Vector& u);
double eval_lagrangian(const ProblemSpec& spec, double s, const Vector& x, const Vector& u,
                       double alpha);
double eval_sup_lagrangian(const ProblemSpec& spec, double s, const Vector& x, const Vector& u);

/// Smallest maximizer of beta -> a(beta) g - b(beta) over beta >= 0, in closed
/// form for the power catalog. Throws UnboundedSup when the supremum is +inf.
double marginal_argmax(const PowerFunction& a, const PowerFunction& b, double g);
/// Same maximizer by golden-section search; independent cross-check.
double marginal_argmax_numeric(const PowerFunction& a, const PowerFunction& b, double g,
                               double tol = 1e-12);
/// sup_beta a(beta) g - b(beta).
double marginal_sup(const PowerFunction& a, const PowerFunction& b, double g);

}  // namespace cvsynth
