#include "doctest.h"

#include <array>
#include <cmath>

#include "nodal/errors.hpp"
#include "nodal/verify.hpp"

using namespace nodal;

namespace {

Nonlinearity family534() { return Nonlinearity::family(make_params(5, 3, 4)); }

RadialProfile stub(int N, double bump) {
  std::vector<double> r, w, wp;
  for (double x = 0.0; x <= 1.0; x += 0.01) r.push_back(x);
  for (double x = std::pow(10.0, 0.01); x <= 1e4; x *= std::pow(10.0, 0.01)) r.push_back(x);
  for (double x : r) {
    const double g = 1.0 + bump * std::exp(-(x - 10.0) * (x - 10.0));
    const double dg = -2.0 * bump * (x - 10.0) * std::exp(-(x - 10.0) * (x - 10.0));
    w.push_back(std::pow(1.0 + x, 2.0 - N) * g);
    wp.push_back((2.0 - N) * std::pow(1.0 + x, 1.0 - N) * g + std::pow(1.0 + x, 2.0 - N) * dg);
  }
  return RadialProfile::from_samples(ModelParams{N, 3.0, 4.0, 1.0, 3.0}, r, w, wp);
}

}  // namespace

TEST_CASE("interaction scaling exponent") {
  CHECK(cm_exponent({4.0, 4.0}, 5) == 3.0);
  CHECK(cm_exponent({6.0, 6.0}, 5) == 6.0);
  CHECK(cm_exponent({4.0, 4.0, 4.0}, 5) == 7.0);
  CHECK(cm_exponent({2.0, 7.0}, 5) == 2.0);
}

TEST_CASE("two equal weights decay at the predicted rate") {
  for (double th : {4.0, 6.0}) {
    CmConfig c{5, {Point{0, 0, 0, 0, 0}, Point{1, 0, 0, 0, 0}}, {th, th}};
    const CmResult r = check_interaction_decay(c, default_cm_ladder());
    CHECK(r.pass);
    CHECK(r.d == 1.0);
    CHECK(r.fitted_exponent == doctest::Approx(-r.mu).epsilon(0.05));
  }
}

TEST_CASE("interaction integral at unit scale is finite and positive") {
  CmConfig c{5, {Point{0, 0, 0, 0, 0}, Point{1, 0, 0, 0, 0}}, {4.0, 4.0}};
  const CmResult r = check_interaction_decay(c, {1.0, 2.0});
  CHECK(std::isfinite(r.values[0]));
  CHECK(r.values[0] > r.values[1]);
  CHECK(r.values[1] > 0.0);
}

TEST_CASE("three points at the corners of a triangle") {
  const double h = std::sqrt(3.0) / 2.0;
  CmConfig c{5, {Point{0, 0, 0, 0, 0}, Point{1, 0, 0, 0, 0}, Point{0.5, h, 0, 0, 0}}, {4.0, 4.0, 4.0}};
  const CmResult r = check_interaction_decay(c, {128.0, 256.0, 512.0, 1024.0});
  CHECK(r.pass);
  CHECK(r.mu == 7.0);
  CHECK(r.fitted_exponent == doctest::Approx(-7.0).epsilon(0.05));
}

TEST_CASE("interaction scaling rejects divergent and malformed input") {
  const Point a{0, 0, 0, 0, 0}, b{1, 0, 0, 0, 0};
  CHECK_THROWS_AS(check_interaction_decay(CmConfig{5, {a, b}, {2.0, 3.0}}, default_cm_ladder()), DomainError);
  CHECK_THROWS_AS(check_interaction_decay(CmConfig{5, {a, a}, {4.0, 4.0}}, default_cm_ladder()), DomainError);
  CHECK_THROWS_AS(check_interaction_decay(CmConfig{5, {a, b}, {4.0}}, default_cm_ladder()), DomainError);
  CHECK_THROWS_AS(check_interaction_decay(CmConfig{5, {a, b}, {4.0, 4.0}}, {128.0}), DomainError);
}

TEST_CASE("random configurations are admissible and reproducible") {
  for (int n : {2, 3}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const CmConfig c = random_cm_config(n, 5, s);
      REQUIRE(c.points.size() == static_cast<std::size_t>(n));
      CHECK(cm_exponent(c.thetas, 5) >= 1.0);
      for (double t : c.thetas) CHECK(std::abs(t - 5.0) >= 0.4);
      const CmConfig again = random_cm_config(n, 5, s);
      CHECK(again.thetas == c.thetas);
    }
  }
}

TEST_CASE("pointwise ratios in closed form") {
  const auto nl = family534();
  // t = 2 with f(u) = u|u|^2 / (1 + |u|)
  for (double u : {0.1, 1.0, 3.0}) {
    const double num = std::abs(2.0 * u * u * u / (1.0 + u) - 8.0 * u * u * u / (1.0 + 2.0 * u));
    CHECK(cmp_ratio(nl, 2.0, u) == doctest::Approx(num / std::pow(u, 7.0 / 3.0)).epsilon(1e-12));
  }
  CHECK(cmp_ratio(nl, 0.0, 1.7) == 0.0);
  CHECK(cmp_ratio(nl, 1.0, 2.0) == 0.0);
  CHECK(cmp_ratio(nl, 0.5, 0.0) == 0.0);
  const std::array<double, 2> opposite{1.3, -1.3};
  CHECK(f_ratio(nl, opposite, 1.0) == 0.0);
  const std::array<double, 3> single{0.0, 2.0, 0.0};
  CHECK(f_ratio(nl, single, 1.0) == 0.0);
  CHECK(acp2_ratio(nl, single, 1.0) == 0.0);
}

TEST_CASE("pointwise ratios are even under a global sign flip") {
  const auto nl = family534();
  const std::array<double, 3> u{0.7, -1.9, 0.3}, v{-0.7, 1.9, -0.3};
  CHECK(f_ratio(nl, u, 0.9) == f_ratio(nl, v, 0.9));
  CHECK(acp2_ratio(nl, u, 0.9) == acp2_ratio(nl, v, 0.9));
  CHECK(cmp_ratio(nl, 0.3, 1.7) == cmp_ratio(nl, 0.3, -1.7));
}

TEST_CASE("sampled suprema stabilise and are reproducible") {
  const auto nl = family534();
  const SupResult a = check_scaling_defect(nl, 200000, 4);
  CHECK(a.pass);
  CHECK(a.sup >= a.sup_half);
  CHECK(std::isfinite(a.sup));
  const SupResult b = check_scaling_defect(nl, 200000, 4);
  CHECK(a.sup == b.sup);
  const SupResult f = check_force_splitting(nl, 4, 1.5, 1.0, 100000, 5);
  CHECK(f.pass);
  CHECK(f.sup > 0.0);
}

TEST_CASE("pair inequality sampled sup agrees with the grid") {
  const auto nl = family534();
  const SupResult r = check_energy_splitting(nl, 2, 1.5, 1.0, 200000, 6);
  REQUIRE(r.grid_sup.has_value());
  CHECK(std::abs(r.sup - *r.grid_sup) <= 0.1 * *r.grid_sup);
  CHECK(r.pass);
}

TEST_CASE("sampling suites reject bad arguments") {
  const auto nl = family534();
  CHECK_THROWS_AS(check_force_splitting(nl, 1, 1.0, 1.0, 1000, 0), DomainError);
  CHECK_THROWS_AS(check_energy_splitting(nl, 2, -1.0, 1.0, 1000, 0), DomainError);
  CHECK_THROWS_AS(check_force_splitting(nl, 2, 1.0, 0.0, 1000, 0), DomainError);
}

TEST_CASE("decay constants of the harmonic stub") {
  for (int N : {5, 6}) {
    const DecayBounds b = check_decay_bounds(stub(N, 0.0));
    CHECK(b.pass);
    CHECK(b.b1 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(b.b2 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(b.b3 == doctest::Approx(N - 2.0).epsilon(1e-3));
  }
}

TEST_CASE("tail monotonicity accepts the stub and flags a bump") {
  CHECK(check_tail_monotonicity(stub(5, 0.0)).pass);
  const TailCheck t = check_tail_monotonicity(stub(5, 0.5));
  CHECK_FALSE(t.pass);
  REQUIRE(t.first_violation.has_value());
  CHECK(*t.first_violation > 9.0);
  CHECK(*t.first_violation < 12.0);
}
