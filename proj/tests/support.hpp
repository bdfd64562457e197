#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "cvsynth/config.hpp"

namespace cvsynth::testing {

/// Scalar instance A = -1, B = 1, K = 2, a = alpha, b = alpha^2, h = id on [-1, 1],
/// with a JSON merge patch applied on top.
inline nlohmann::json scalar_config(const nlohmann::json& patch = nlohmann::json::object()) {
  nlohmann::json c = nlohmann::json::parse(R"({
    "dims": {"state": 1, "control": 1},
    "A": {"variant": "constant", "params": {"value": -1.0}},
    "B": {"variant": "constant", "params": {"value": 1.0}},
    "R": {"variant": "scaled_identity", "params": {"scale": 0.5}},
    "K": {"variant": "step", "params": {"value": 2.0}},
    "a": {"variant": "linear", "params": {"coefficient": 1.0}},
    "b": {"variant": "power", "params": {"coefficient": 1.0, "exponent": 2.0}},
    "h": {"variant": "identity"},
    "omega": {"variant": "box", "params": {"lower": [-1.0], "upper": [1.0]}},
    "grid": {"t0": 0.0, "dt": 0.01, "horizon": 10.0, "T_max": 400.0}
  })");
  c.merge_patch(patch);
  return c;
}

inline ProblemSpec scalar_problem(const nlohmann::json& patch = nlohmann::json::object()) {
  return build_problem(scalar_config(patch));
}

/// Two-dimensional ball instance with B = I and h = id.
inline nlohmann::json ball_config(const nlohmann::json& patch = nlohmann::json::object()) {
  nlohmann::json c = scalar_config(nlohmann::json::parse(R"({
    "dims": {"state": 2, "control": 2},
    "A": {"variant": "constant", "params": {"value": [[-1.0, 0.0], [0.0, -1.0]]}},
    "B": {"variant": "constant", "params": {"value": [[1.0, 0.0], [0.0, 1.0]]}},
    "omega": {"variant": "ball", "params": {"center": [0.0, 0.0], "radius": 1.0}}
  })"));
  c.merge_patch(patch);
  return c;
}

inline ProblemSpec ball_problem(const nlohmann::json& patch = nlohmann::json::object()) {
  return build_problem(ball_config(patch));
}

/// Stabilizing root of -2 B^2 P^2 + 2 A P + q = 0 (scalar, R = 1/2).
inline double scalar_are_root(double A, double B, double q) {
  return (A + std::sqrt(A * A + 2.0 * B * B * q)) / (2.0 * B * B);
}

/// Closed-form finite-horizon scalar solution with P(T) = 0 at time-to-go tau.
inline double scalar_finite_riccati(double A, double B, double q, double tau) {
  const double c = 2.0 * B * B;
  const double p1 = (A + std::sqrt(A * A + c * q)) / c;
  const double p2 = (A - std::sqrt(A * A + c * q)) / c;
  const double E = (p1 / p2) * std::exp(-c * (p1 - p2) * tau);
  return (p1 - E * p2) / (1.0 - E);
}

}  // namespace cvsynth::testing
