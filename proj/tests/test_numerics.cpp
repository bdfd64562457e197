#include <doctest.h>

#include <cmath>
#include <vector>

#include "cvsynth/error.hpp"
#include "cvsynth/numerics.hpp"
#include "cvsynth/parallel.hpp"

using namespace cvsynth;

TEST_CASE("covering grid ends exactly on the requested time") {
  const TimeGrid g = TimeGrid::covering(0.0, 1.0, 0.3);
  CHECK(g.n_steps() == 4);
  CHECK(g.dt() == doctest::Approx(0.25));
  CHECK(g.t_end() == 1.0);
  CHECK(g.node(g.n_steps()) == 1.0);
  CHECK(g.node_index(0.5).value() == 2);
  CHECK_FALSE(g.node_index(0.6).has_value());
  CHECK_FALSE(g.spans(1.1));
  const auto [i, theta] = g.locate(0.6);
  CHECK(i == 2);
  CHECK(theta == doctest::Approx(0.4));
}

TEST_CASE("time grid rejects bad steps") {
  CHECK_THROWS_AS(TimeGrid(0.0, 0.0, 3), Error);
  CHECK_THROWS_AS(TimeGrid::covering(1.0, 0.0, 0.1), Error);
}

TEST_CASE("SymMatrix symmetrizes bitwise") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 4.0, 3.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == 3.0);
  Vector v(2);
  v << 1.0, -1.0;
  CHECK(s.quadratic_form(v) == doctest::Approx(1.0 - 6.0 + 3.0));
}

TEST_CASE("symmetric eigen extremes and spectral abscissa") {
  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const EigExtremes e = eig_sym_extremes(SymMatrix(m));
  CHECK(e.min == doctest::Approx(1.0));
  CHECK(e.max == doctest::Approx(3.0));
  Matrix rot(2, 2);
  rot << -0.5, 2.0, -2.0, -0.5;  // eigenvalues -0.5 +- 2i
  CHECK(spectral_abscissa(rot) == doctest::Approx(-0.5));
}

TEST_CASE("rk4 is fourth order on exponential decay") {
  auto err = [](double h) {
    Vector y = Vector::Constant(1, 1.0);
    auto rhs = [](double, const Vector& x) { return Vector(-x); };
    const int n = static_cast<int>(std::round(1.0 / h));
    for (int k = 0; k < n; ++k) y = rk4_step(rhs, k * h, y, h);
    return std::abs(y[0] - std::exp(-1.0));
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("integrate_ode runs forward and backward") {
  auto rhs = [](double, const Vector& x) { return Vector(2.0 * x); };
  const SampledPath fwd = integrate_ode(rhs, 0.0, 1.0, Vector::Constant(1, 1.0), 0.01);
  CHECK(fwd.values.back()[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-8));
  CHECK(fwd.at(0.505)[0] == doctest::Approx(std::exp(1.01)).epsilon(1e-7));
  const SampledPath bwd = integrate_ode(rhs, 1.0, 0.0, Vector::Constant(1, 1.0), 0.01);
  CHECK(bwd.grid.t0() == 0.0);
  CHECK(bwd.values.front()[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-8));
  auto blow = [](double, const Vector& x) { return Vector(x.array().square() * 1e200); };
  CHECK_THROWS_AS(integrate_ode(blow, 0.0, 1.0, Vector::Constant(1, 1e200), 0.1), Error);
}

TEST_CASE("Simpson quadrature handles even and odd panel counts") {
  auto cubic = [](double s) { return s * s * s - 2.0 * s + 1.0; };
  // Exact for cubics with both the 1/3 and 3/8 closures.
  CHECK(quadrature(cubic, 0.0, 2.0, 4) == doctest::Approx(2.0));
  CHECK(quadrature(cubic, 0.0, 2.0, 5) == doctest::Approx(2.0));
  // Four 1/3 panels then one 3/8 closure, summed by hand.
  const double h = 1.0 / 7.0;
  double by_hand = h / 3.0 * (1.0 + 4.0 * std::exp(h) + 2.0 * std::exp(2 * h) + 4.0 * std::exp(3 * h) + std::exp(4 * h));
  by_hand += 3.0 * h / 8.0 * (std::exp(4 * h) + 3.0 * std::exp(5 * h) + 3.0 * std::exp(6 * h) + std::exp(1.0));
  CHECK(quadrature([](double s) { return std::exp(s); }, 0.0, 1.0, 7) == doctest::Approx(by_hand).epsilon(1e-13));
  CHECK(quadrature([](double s) { return std::exp(s); }, 0.0, 1.0, 64) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-9));
  CHECK(quadrature(cubic, 1.0, 1.0, 4) == 0.0);
}

TEST_CASE("golden section finds the smallest maximizer") {
  CHECK(golden_section_maximize([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10) ==
        doctest::Approx(0.3).epsilon(1e-6));
  // Maximum at the left endpoint.
  CHECK(golden_section_maximize([](double x) { return -x; }, 0.0, 1.0, 1e-10) == doctest::Approx(0.0));
}

TEST_CASE("finite difference Jacobian matches the analytic one") {
  auto f = [](const Vector& x) {
    Vector y(2);
    y << x[0] * x[1], std::sin(x[0]);
    return y;
  };
  Vector x(2);
  x << 0.5, 2.0;
  const Matrix J = finite_difference_jacobian(f, x, 1e-6);
  CHECK(J(0, 0) == doctest::Approx(2.0));
  CHECK(J(0, 1) == doctest::Approx(0.5));
  CHECK(J(1, 0) == doctest::Approx(std::cos(0.5)));
  CHECK(J(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) fail(ErrorCode::InvalidValue, "boom");
                  }),
                  Error);
}
