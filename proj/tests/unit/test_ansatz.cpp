#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include "nodal/ansatz.hpp"
#include "nodal/errors.hpp"
#include "nodal/symmetry.hpp"

using namespace nodal;

namespace {

struct Fixture {
  Nonlinearity nl = Nonlinearity::family(make_params(5, 3, 4));
  std::shared_ptr<const RadialProfile> profile;
  Fixture() { profile = std::make_shared<const RadialProfile>(shoot_ground_state(nl).profile); }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// μ1 and μ2 for the remainder sums with ω ~ r^{2-N}
double pair_exponent(double alpha, int N) {
  return std::min((1.0 + alpha / 2.0) * (N - 2), (2.0 + alpha) * (N - 2) - N);
}
double triple_exponent(double alpha, int N) {
  return std::min({(alpha + 1.0) * (N - 2), 2.0 * alpha * (N - 2), (2.0 * alpha + 1.0) * (N - 2) - N});
}

}  // namespace

TEST_CASE("glued function is equivariant") {
  const auto& fx = fixture();
  const AnsatzState st(fx.profile, orbit_points(6, 5), 10.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-15.0, 15.0);
  for (int k = 0; k < 100; ++k) {
    Point x(5);
    for (double& c : x) c = u(rng);
    const double v = st.sigma_hat(x);
    CHECK(std::abs(st.sigma_hat(rotate(x, 6)) - v) <= 1e-12 * (1.0 + std::abs(v)));
    CHECK(std::abs(st.sigma_hat(swap_planes(x)) + v) <= 1e-12 * (1.0 + std::abs(v)));
  }
}

TEST_CASE("glued function vanishes where z1 = z2") {
  const auto& fx = fixture();
  const AnsatzState st(fx.profile, orbit_points(6, 5), 10.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int k = 0; k < 50; ++k) {
    const double a = u(rng), b = u(rng), y = u(rng);
    const Point x{a, b, a, b, y};
    CHECK(std::abs(st.sigma_hat(x)) <= 1e-12);
  }
}

TEST_CASE("glued function near a centre is the bump plus small tails") {
  const auto& fx = fixture();
  const OrbitConfig orbit = orbit_points(6, 5);
  double previous = INFINITY;
  for (double R : {10.0, 20.0, 40.0}) {
    const AnsatzState st(fx.profile, orbit, R);
    Point x = orbit.points[0];
    for (double& c : x) c *= R;
    double tails = 0.0;
    for (std::size_t j = 1; j < orbit.points.size(); ++j) tails += fx.profile->value(R * dist(orbit.points[0], orbit.points[j]));
    const double gap = std::abs(st.sigma_hat(x) - fx.profile->a_star());
    CHECK(gap <= tails * (1.0 + 1e-12));
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("state construction validates its inputs") {
  const auto& fx = fixture();
  CHECK_THROWS_AS(AnsatzState(fx.profile, orbit_points(6, 5), 0.0), DomainError);
  CHECK_THROWS_AS(AnsatzState(fx.profile, orbit_points(6, 5), -1.0), DomainError);
  CHECK_THROWS_AS(AnsatzState(nullptr, orbit_points(6, 5), 10.0), DomainError);
  const AnsatzState st(fx.profile, orbit_points(6, 5), 10.0);
  CHECK(std::isnan(st.t_R()));
  CHECK(st.copies() == 12);
  CHECK(st.with_t(0.9).t_R() == 0.9);
}

TEST_CASE("single bump is its own Nehari point and carries energy c0") {
  const auto& fx = fixture();
  const AnsatzState sb = AnsatzState::single_bump(fx.profile, 10.0);
  AnsatzOptions o;
  o.mc_samples = 100000;
  const NehariResult n = nehari_scale(sb, fx.nl, o);
  CHECK(std::abs(n.t - 1.0) <= 1e-6);
  const EnergyDecomposition d = energy_decomposed(sb.with_t(n.t), fx.nl, o);
  CHECK(std::abs(d.J.value - fx.profile->c0()) <= 1e-6 * fx.profile->c0());
  const IntegralEstimate e = energy_direct(sb.with_t(n.t), fx.nl, 200000, 3);
  CHECK(std::abs(e.value - fx.profile->c0()) <= 4.0 * e.abs_error);
}

TEST_CASE("Nehari scale converges to 1 along the ladder") {
  const auto& fx = fixture();
  AnsatzOptions o;
  o.mc_samples = 100000;
  double previous = INFINITY;
  for (double R : {10.0, 20.0, 40.0, 80.0}) {
    const NehariResult n = nehari_scale(AnsatzState(fx.profile, orbit_points(6, 5), R), fx.nl, o);
    CHECK(n.residual <= 1e-8);
    CHECK(std::abs(n.t - 1.0) < previous);
    previous = std::abs(n.t - 1.0);
  }
}

TEST_CASE("Nehari scale tracks a rescaled profile") {
  const auto& fx = fixture();
  const RadialProfile& p = *fx.profile;
  std::vector<double> w = p.omega(), wp = p.omega_prime(), wpp = p.omega_second();
  for (auto* v : {&w, &wp, &wpp})
    for (double& x : *v) x *= 1.1;
  const auto scaled = std::make_shared<const RadialProfile>(
      RadialProfile::from_solution(p.params(), p.grid(), w, wp, wpp, 1.1 * p.a_star()).with_energy(p.c0()));
  AnsatzOptions o;
  o.mc_samples = 100000;
  const double t0 = nehari_scale(AnsatzState(fx.profile, orbit_points(6, 5), 20.0), fx.nl, o).t;
  const NehariResult n = nehari_scale(AnsatzState(scaled, orbit_points(6, 5), 20.0), fx.nl, o);
  CHECK(n.t < t0 - 0.05);
  CHECK(n.residual <= 1e-8);
}

TEST_CASE("interaction sum matches its far-field limit") {
  const auto& fx = fixture();
  const C0Result c = C0_limit(*fx.profile, fx.nl);
  const double S = sign_condition_exact(6, 5).value;
  const double L = interaction_sum(AnsatzState(fx.profile, orbit_points(6, 5), 80.0), fx.nl).value;
  CHECK(L * std::pow(80.0, 3) == doctest::Approx(2.0 * c.C0 * S).epsilon(0.01));
}

TEST_CASE("equal signs raise the interaction sum") {
  const auto& fx = fixture();
  const OrbitConfig orbit = orbit_points(6, 5);
  const AnsatzState mixed(fx.profile, orbit, 10.0);
  const AnsatzState equal(fx.profile, orbit.points, std::vector<int>(orbit.points.size(), 1), 10.0);
  CHECK(interaction_sum(equal, fx.nl).value > interaction_sum(mixed, fx.nl).value);
}

TEST_CASE("interaction integral limit agrees with the mass formula") {
  const auto& fx = fixture();
  const C0Result c = C0_limit(*fx.profile, fx.nl);
  CHECK(c.relative_difference <= 0.01);
  CHECK(std::abs(c.C0 - c.C0_check) <= 0.01 * c.C0_check);
  CHECK(c.C0_hat > 0.0);
  CHECK_FALSE(c.convergence_warning);
}

TEST_CASE("remainder exponents exceed N-2 above the threshold exponent") {
  for (int N = 5; N <= 10; ++N) {
    const double a0 = N / (2.0 * (N - 2));
    for (double alpha : {a0 + 0.01, a0 + 0.2, 1.0, 1.5}) {
      if (alpha <= a0) continue;
      CHECK(pair_exponent(alpha, N) > N - 2);
      CHECK(triple_exponent(alpha, N) > N - 2);
    }
  }
  CHECK(pair_exponent(1.0, 5) == 4.0);
  CHECK(triple_exponent(1.0, 5) == 4.0);
}

TEST_CASE("remainder sums decay with the predicted exponent") {
  const auto& fx = fixture();
  std::vector<double> R{80.0, 160.0}, pair, triple;
  for (double r : R) {
    const Majorants m = remainder_majorants(AnsatzState(fx.profile, orbit_points(6, 5), r).with_t(1.0), 1.0, 1.0, 1.0);
    pair.push_back(m.pair_sum.value);
    triple.push_back(m.triple_sum.value);
  }
  CHECK(loglog_slope(R, pair) == doctest::Approx(-pair_exponent(1.0, 5)).epsilon(0.03));
  CHECK(loglog_slope(R, triple) == doctest::Approx(-triple_exponent(1.0, 5)).epsilon(0.03));
}

TEST_CASE("decomposed and direct energies agree") {
  const auto& fx = fixture();
  AnsatzOptions o;
  o.mc_samples = 200000;
  o.seed = 11;
  for (double R : {20.0, 40.0}) {
    const AnsatzState st(fx.profile, orbit_points(6, 5), R);
    const NehariResult n = nehari_scale(st, fx.nl, o);
    const EnergyDecomposition d = energy_decomposed(st.with_t(n.t), fx.nl, o);
    const IntegralEstimate e = energy_direct(st.with_t(n.t), fx.nl, 200000, 12);
    CHECK(std::abs(d.J.value - e.value) <= 3.0 * std::hypot(d.J.abs_error, e.abs_error));
    CHECK(d.margin.value > 0.0);
  }
}

TEST_CASE("bound check rejects a failing sign condition and bad ladders") {
  const auto& fx = fixture();
  AnsatzOptions o;
  o.mc_samples = 20000;
  CHECK_THROWS_AS(bound_check(fx.profile, fx.nl, 5, {10.0, 20.0}, o), DomainError);
  CHECK_THROWS_AS(bound_check(fx.profile, fx.nl, 6, {20.0, 10.0}, o), DomainError);
  CHECK_THROWS_AS(bound_check(fx.profile, fx.nl, 6, {}, o), DomainError);
}

TEST_CASE("bound check reports the 2m c0 level") {
  const auto& fx = fixture();
  AnsatzOptions o;
  o.mc_samples = 20000;
  const BoundReport r = bound_check(fx.profile, fx.nl, 6, {10.0, 20.0}, o);
  REQUIRE(r.rows.size() == 2);
  for (const BoundRow& row : r.rows) CHECK(row.bound_2mc0 == doctest::Approx(12.0 * fx.profile->c0()).epsilon(1e-14));
  CHECK(r.certified());
  CHECK(*r.least_certified_R == 10.0);
  CHECK(r.t_monotone);
  const std::string csv = energy_curve_csv(r);
  CHECK(csv.rfind("R,t_R,J_decomposed,J_decomposed_err,J_direct,J_direct_err,bound_2mc0,margin", 0) == 0);
}
