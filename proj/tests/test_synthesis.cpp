#include <doctest.h>

#include <cmath>

#include "cvsynth/error.hpp"
#include "cvsynth/riccati.hpp"
#include "cvsynth/synthesis.hpp"
#include "support.hpp"

using namespace cvsynth;
using cvsynth::testing::scalar_finite_riccati;
using cvsynth::testing::scalar_problem;
using nlohmann::json;

namespace {

const AlphaPolicy kZero = AlphaPolicy::constant(0.0);
const double kRoot = (std::sqrt(3.0) - 1.0) / 2.0;

Vector vec1(double v) { return Vector::Constant(1, v); }

// K = 2, a = 0: Q = 1 and P = (sqrt 3 - 1) / 2.
ProblemSpec unit_q(const json& patch = json::object()) {
  json p = json::parse(R"({"a": {"params": {"coefficient": 0.0}}})");
  p.merge_patch(patch);
  return scalar_problem(p);
}

RiccatiSolution stabilizing(const ProblemSpec& spec, double T_eval = 12.0) {
  return solve_stabilizing(spec, kZero, 0.0, T_eval, 1e-11);
}

}  // namespace

TEST_CASE("feedback control examples") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec, 1.0);
  CHECK(feedback_control(spec, P, 0.3, vec1(1.0))[0] == doctest::Approx(1.0 - std::sqrt(3.0)).epsilon(1e-9));
  CHECK(feedback_control(spec, P, 0.3, vec1(0.0))[0] == 0.0);
  const ProblemSpec cubic = unit_q(json::parse(R"({"h": {"variant": "odd_cubic", "params": {"beta": 0.5}}})"));
  CHECK(feedback_control(cubic, stabilizing(cubic, 1.0), 0.0, vec1(0.0))[0] == 0.0);
  const RiccatiSolution zero = RiccatiSolution::zero(TimeGrid(0.0, 0.1, 5), 1);
  CHECK(feedback_control(spec, zero, 0.2, vec1(0.8))[0] == 0.0);
}

TEST_CASE("closed-loop trajectory decays at rate sqrt 3") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec);
  const Trajectory tr = simulate_closed_loop(spec, P, kZero, 0.0, vec1(0.9), 10.0);
  CHECK_FALSE(tr.violated());
  CHECK(tr.size() == 1001);
  for (std::size_t i = 0; i < tr.size(); i += 50) {
    CHECK(std::abs(tr.xi[i][0] - 0.9 * std::exp(-std::sqrt(3.0) * tr.s[i])) < 1e-9);
    CHECK(tr.omega_margin[i] > 0.0);
  }
}

TEST_CASE("equilibrium trajectory costs nothing") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec);
  const Trajectory tr = simulate_closed_loop(spec, P, kZero, 0.0, vec1(0.0), 5.0);
  for (const Vector& x : tr.xi) CHECK(x[0] == 0.0);
  CHECK(cost_of_trajectory(spec, tr, kZero, &P).total() == 0.0);
}

TEST_CASE("open-loop escape is flagged at ln 2") {
  const ProblemSpec spec = unit_q(json::parse(R"({"A": {"params": {"value": 1.0}}})"));
  const RiccatiSolution zero = RiccatiSolution::zero(TimeGrid(0.0, 0.01, 200), 1);
  const Trajectory tr = simulate_closed_loop(spec, zero, kZero, 0.0, vec1(0.5), 2.0);
  REQUIRE(tr.violated());
  CHECK(std::abs(*tr.exit_time - std::log(2.0)) < 2.0 * spec.grid.dt);
  CHECK(tr.size() == 201);
  CHECK(tr.omega_margin.back() < 0.0);
}

TEST_CASE("start outside the set is rejected") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec, 1.0);
  CHECK_THROWS_AS(simulate_closed_loop(spec, P, kZero, 0.0, vec1(1.5), 1.0), Error);
}

TEST_CASE("value formula") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec, 1.0);
  CHECK(value_from_riccati(spec, P, kZero, 0.0, vec1(1.0)) == doctest::Approx(kRoot).epsilon(1e-9));
  CHECK(value_from_riccati(spec, P, kZero, 0.0, vec1(0.0)) == 0.0);
  // With alpha the b tail is subtracted in closed form: b = alpha^2 on a window of length 2.
  const ProblemSpec full = scalar_problem();
  const AlphaPolicy w = AlphaPolicy::windowed(0.5, 0.0, 2.0);
  const RiccatiSolution Pw = solve_stabilizing(full, w, 0.0, 1.0, 1e-11);
  CHECK(value_from_riccati(full, Pw, w, 0.0, vec1(0.0)) == doctest::Approx(-0.25 * 2.0));
}

TEST_CASE("finite-horizon value") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P1 = solve_finite_horizon(spec, kZero, 0.0, 0.0);
  CHECK(finite_value_from_riccati(spec, P1, kZero, 0.0, 0.0, vec1(0.7)) == 0.0);
  const RiccatiSolution P10 = solve_finite_horizon(spec, kZero, 0.0, 10.0);
  CHECK(std::abs(finite_value_from_riccati(spec, P10, kZero, 0.0, 10.0, vec1(1.0)) - kRoot) < 1e-4);
  const ProblemSpec full = scalar_problem();
  const RiccatiSolution P3 = solve_finite_horizon(full, AlphaPolicy::constant(0.5), 0.0, 3.0);
  CHECK(finite_value_from_riccati(full, P3, AlphaPolicy::constant(0.5), 0.0, 3.0, vec1(0.6)) ==
        doctest::Approx(P3.node(0)(0, 0) * 0.36 - 0.25 * 3.0).epsilon(1e-12));
  CHECK(P3.node(0)(0, 0) == doctest::Approx(scalar_finite_riccati(-1.0, 1.0, 1.5, 3.0)).epsilon(1e-8));
}

TEST_CASE("Hamiltonian against a brute-force minimum") {
  const ProblemSpec spec = unit_q();
  CHECK(hamiltonian(spec, 0.0, vec1(0.8), vec1(0.0), 0.0) == doctest::Approx(0.64));
  const ProblemSpec full = scalar_problem();
  CHECK(hamiltonian(full, 0.0, vec1(0.8), vec1(0.0), 0.5) == doctest::Approx(1.5 * 0.64 - 0.25));
  for (double x : {-0.9, 0.3, 0.7}) {
    const double p = 2.0 * kRoot * x;
    double best = kInfinity;
    for (int k = 0; k <= 400000; ++k) {
      const double u = -2.0 + 1e-5 * k;
      best = std::min(best, p * (-x + u) + x * x + 0.5 * u * u);
    }
    CHECK(std::abs(hamiltonian(spec, 0.0, vec1(x), vec1(p), 0.0) - best) < 1e-8);
  }
  const ProblemSpec drift = unit_q(json::parse(R"({"B": {"params": {"value": 0.0}}})"));
  CHECK(hamiltonian(drift, 0.0, vec1(0.5), vec1(2.0), 0.0) == doctest::Approx(2.0 * -0.5 + 0.25));
}

TEST_CASE("HJB residual") {
  const ProblemSpec zero_spec = unit_q(json::parse(R"({"K": {"params": {"value": 0.0}}})"));
  const RiccatiSolution Z = solve_finite_horizon(zero_spec, kZero, 0.0, 2.0);
  CHECK(hjb_residual(zero_spec, Z, kZero, 1.0, vec1(0.4)) == 0.0);
  auto worst = [](double dt) {
    json patch = json::parse(R"({"A": {"variant": "sinusoid", "params": {"base": -1.0, "amplitude": 0.5, "frequency": 2.0}}})");
    patch["grid"] = {{"dt", dt}};
    const ProblemSpec spec = unit_q(patch);
    const RiccatiSolution P = solve_finite_horizon(spec, kZero, 0.0, 2.0);
    double w = 0.0;
    for (double s : {0.3, 0.9, 1.5})
      for (double x : {-0.8, 0.2, 0.9}) w = std::max(w, std::abs(hjb_residual(spec, P, kZero, s, vec1(x))));
    return w;
  };
  const double coarse = worst(0.05);
  const double fine = worst(0.025);
  CHECK(coarse < 0.05 * 0.05);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec, 1.0);
  CHECK_THROWS_AS(hjb_residual(spec, P, kZero, P.grid().t_end(), vec1(0.1)), Error);
}

TEST_CASE("closed-loop cost matches the value") {
  const ProblemSpec spec = unit_q();
  const RiccatiSolution P = stabilizing(spec);
  const Trajectory tr = simulate_closed_loop(spec, P, kZero, 0.0, vec1(1.0), 8.0);
  const TrajectoryCost c = cost_of_trajectory(spec, tr, kZero, &P);
  CHECK(c.total() == doctest::Approx(kRoot).epsilon(1e-4));
  CHECK(c.tail > 0.0);
  CHECK(c.tail < 1e-6);
  CHECK(tr.cum_cost.back() == doctest::Approx(c.truncated));
}

TEST_CASE("doubling the weight raises the cost") {
  const ProblemSpec one = unit_q();
  const ProblemSpec two = unit_q(json::parse(R"({"K": {"params": {"value": 4.0}}})"));
  const RiccatiSolution P1 = stabilizing(one);
  const RiccatiSolution P2 = stabilizing(two);
  const double c1 = cost_of_trajectory(one, simulate_closed_loop(one, P1, kZero, 0.0, vec1(0.6), 8.0), kZero, &P1).total();
  const double c2 = cost_of_trajectory(two, simulate_closed_loop(two, P2, kZero, 0.0, vec1(0.6), 8.0), kZero, &P2).total();
  CHECK(c2 > c1);
}

TEST_CASE("perturbed controls never beat the finite-horizon value") {
  const ProblemSpec spec = scalar_problem(json::parse(R"({"h": {"variant": "odd_cubic", "params": {"beta": 0.5}}})"));
  const AlphaPolicy alpha = AlphaPolicy::windowed(0.4, 0.5, 1.5);
  const RiccatiSolution P = solve_finite_horizon(spec, alpha, 0.0, 3.0);
  const PerturbationReport r = perturbation_study(spec, P, alpha, 0.0, vec1(0.5), 0.1, 20, 11);
  CHECK(r.samples == 20);
  CHECK(r.min_excess >= -1e-6);
  CHECK(r.sensitivity > 0.0);
  const PerturbationReport again = perturbation_study(spec, P, alpha, 0.0, vec1(0.5), 0.1, 20, 11);
  CHECK(again.min_excess == r.min_excess);
}
