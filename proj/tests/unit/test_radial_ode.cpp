#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nodal/errors.hpp"
#include "nodal/profile_io.hpp"
#include "nodal/radial_ode.hpp"

using namespace nodal;

namespace {

const Nonlinearity& family534() {
  static const Nonlinearity nl = Nonlinearity::family(make_params(5, 3, 4));
  return nl;
}

const ShootReport& ground534() {
  static const ShootReport rep = shoot_ground_state(family534());
  return rep;
}

RadialProfile harmonic_stub(int N, double r_max = 1e4) {
  std::vector<double> r, w, wp;
  for (double x = 0.0; x <= 1.0; x += 0.01) r.push_back(x);
  for (double x = 1.0 * std::pow(10.0, 1.0 / 100); x <= r_max; x *= std::pow(10.0, 1.0 / 100)) r.push_back(x);
  for (double x : r) {
    w.push_back(std::pow(1.0 + x, 2.0 - N));
    wp.push_back((2.0 - N) * std::pow(1.0 + x, 1.0 - N));
  }
  ModelParams pm{N, 3.0, 4.0, 1.0, 3.0};
  return RadialProfile::from_samples(pm, r, w, wp);
}

}  // namespace

TEST_CASE("zero nonlinearity keeps the constant solution") {
  const auto z = Nonlinearity::zero(5);
  const ShotResult s = integrate_ivp(z, 1.0, 100.0, 1e-10);
  for (double w : s.trajectory.omega) CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.classification.kind == ShotKind::Undecided);
  CHECK_THROWS_AS(integrate_ivp(z, 0.0, 100.0, 1e-10), DomainError);
  CHECK_THROWS_AS(integrate_ivp(z, -1.0, 100.0, 1e-10), DomainError);
}

TEST_CASE("large amplitudes cross, small amplitudes decay slowly") {
  const auto& nl = family534();
  const ShotResult big = integrate_ivp(nl, 1e3, 1e3, 1e-10);
  CHECK(big.classification.kind == ShotKind::Crossing);
  REQUIRE(big.classification.crossing_radius.has_value());
  CHECK(*big.classification.crossing_radius > 0.0);
  CHECK(big.trajectory.omega.back() == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));

  CHECK(classify_amplitude(nl, 1e-2, 1e-10) == ShotKind::SlowDecay);
  const double a = 0.1;
  const ShotResult small = integrate_ivp(nl, a, 1e5 * shot_scale(nl, a), 1e-10);
  CHECK(small.classification.kind == ShotKind::SlowDecay);
  CHECK(std::abs(small.classification.tail_slope / -1.0 - 1.0) < 0.05);
}

TEST_CASE("ground state (5,3,4)") {
  const ShootReport& rep = ground534();
  const RadialProfile& p = rep.profile;
  CHECK(p.a_star() > 0.0);
  CHECK(p.c0() > 0.0);
  CHECK(rep.classification.kind == ShotKind::FastDecay);
  CHECK(std::abs(rep.classification.tail_slope / -3.0 - 1.0) < 0.02);

  const auto& r = p.grid();
  CHECK(r.front() == 0.0);
  CHECK(p.omega_prime().front() == 0.0);
  for (std::size_t k = 1; k < r.size(); ++k) {
    CHECK(p.omega()[k] < p.omega()[k - 1]);
    CHECK(p.omega()[k] > 0.0);
    CHECK(p.omega_prime()[k] < 0.0);
  }
  CHECK_FALSE(first_tail_violation(p).has_value());
  CHECK_NOTHROW(decay_constant(p));

  const Residuals res = pohozaev_nehari_residuals(p, family534());
  CHECK(res.nehari < 1e-4);
  CHECK(res.pohozaev < 1e-4);
  // Nehari and Pohozaev together give J(ω) = ‖ω‖²/N
  CHECK(p.c0() == doctest::Approx(res.norm_sq / 5.0).epsilon(1e-8));

  // κ∞ inside the sandwich of ω (1+r)^{N-2}
  double b1 = 1e300, b2 = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double v = p.omega()[k] * std::pow(1.0 + r[k], 3.0);
    b1 = std::min(b1, v);
    b2 = std::max(b2, v);
  }
  CHECK(p.kappa_inf() >= b1);
  CHECK(p.kappa_inf() <= b2);
}

TEST_CASE("ground state self-convergence") {
  const ShootReport& base = ground534();
  ShootOptions wide;
  wide.r_max = 2e3;
  const ShootReport w = shoot_ground_state(family534(), wide);
  CHECK(std::abs(w.profile.c0() / base.profile.c0() - 1.0) < 1e-3);
  CHECK(std::abs(w.profile.kappa_inf() / base.profile.kappa_inf() - 1.0) < 1e-2);

  ShootOptions fine;
  fine.points_per_decade = 400;
  fine.core_points = 200;
  const ShootReport f = shoot_ground_state(family534(), fine);
  CHECK(std::abs(f.profile.c0() / base.profile.c0() - 1.0) < 1e-3);
}

TEST_CASE("scaled profile breaks the Nehari constraint") {
  const RadialProfile& p = ground534().profile;
  std::vector<double> w = p.omega(), wp = p.omega_prime(), wpp = p.omega_second();
  for (auto* v : {&w, &wp, &wpp}) {
    for (double& x : *v) x *= 1.1;
  }
  const RadialProfile scaled =
      RadialProfile::from_solution(p.params(), p.grid(), w, wp, wpp, 1.1 * p.a_star());
  CHECK(pohozaev_nehari_residuals(scaled, family534()).nehari > 0.01);
}

TEST_CASE("same-class bracket is rejected") {
  ShootOptions o;
  o.a_lo = 100.0;
  o.a_hi = 200.0;
  CHECK_THROWS_AS(shoot_ground_state(family534(), o), BracketError);
}

TEST_CASE("harmonic stub decay constant and tail") {
  for (int N : {5, 7}) {
    const RadialProfile h = harmonic_stub(N);
    const DecayFit fit = decay_constant(h);
    CHECK(fit.kappa_inf == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(first_tail_violation(h).has_value());
  }
}

TEST_CASE("Richardson limit recovers the exponent") {
  std::vector<double> x, y;
  for (double r = 100.0; r <= 1000.0; r *= 1.1) {
    x.push_back(r);
    y.push_back(2.5 + 3.0 * std::pow(r, -1.7) - 40.0 * std::pow(r, -3.4));
  }
  const DecayFit d = richardson_limit(x, y, 3);
  CHECK(d.kappa_inf == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(d.exponent == doctest::Approx(1.7).epsilon(1e-2));
}

TEST_CASE("critical power instanton energy") {
  // U = (N(N-2))^{(N-2)/4} (1+r²)^{-(N-2)/2} solves -ΔU = U^{2*-1};
  // J(U) = S^{N/2}/N with S = πN(N-2) (Γ(N/2)/Γ(N))^{2/N}
  const int N = 5;
  const double c = std::pow(N * (N - 2.0), (N - 2.0) / 4.0);
  std::vector<double> r, w, wp, wpp;
  for (int k = 0; k <= 100; ++k) r.push_back(0.01 * k);
  for (double x = std::pow(10.0, 1.0 / 200); x <= 1e4; x *= std::pow(10.0, 1.0 / 200)) r.push_back(x);
  for (double x : r) {
    const double b = 1.0 + x * x;
    w.push_back(c * std::pow(b, -1.5));
    wp.push_back(-3.0 * c * x * std::pow(b, -2.5));
    wpp.push_back(-3.0 * c * std::pow(b, -2.5) + 15.0 * c * x * x * std::pow(b, -3.5));
  }
  ModelParams pm{N, 10.0 / 3.0, 10.0 / 3.0, 1.0, 10.0 / 3.0};
  const RadialProfile prof = RadialProfile::from_solution(pm, r, w, wp, wpp, c);
  const auto nl = Nonlinearity::pure_power(N, 10.0 / 3.0);
  const double S = std::numbers::pi * N * (N - 2.0) * std::pow(std::tgamma(N / 2.0) / std::tgamma(N), 2.0 / N);
  const double exact = std::pow(S, N / 2.0) / N;
  CHECK(std::abs(energy_c0(prof, nl) / exact - 1.0) < 5e-3);
}

TEST_CASE("profile CSV round trip is bit faithful") {
  const RadialProfile& p = ground534().profile;
  const std::string text = profile_csv(p);
  CHECK(text.rfind("# nodal-energy-lab profile v1, N=5, p=3, q=4, a_star=", 0) == 0);
  const ProfileTable t = parse_profile_csv(text);
  CHECK(t.r == p.grid());
  CHECK(t.omega == p.omega());
  CHECK(t.omega_prime == p.omega_prime());
  CHECK(t.a_star == p.a_star());
  CHECK(t.c0 == p.c0());
  CHECK(t.kappa_inf == p.kappa_inf());
  const RadialProfile back = profile_from_table(t, &family534());
  CHECK(profile_csv(back) == text);
  CHECK(back.value(3.7) == doctest::Approx(p.value(3.7)).epsilon(1e-14));
}

TEST_CASE("profile interpolation reproduces the ODE solution between nodes") {
  const RadialProfile& p = ground534().profile;
  const auto& nl = family534();
  // midpoints: ω'' + (N-1)/r ω' + f(ω) is small everywhere on the grid span
  const auto& r = p.grid();
  for (std::size_t k = 1; k + 1 < r.size(); k += 7) {
    const double x = 0.5 * (r[k] + r[k + 1]);
    const double h = 1e-4 * x;
    const double d2 = (p.derivative(x + h) - p.derivative(x - h)) / (2.0 * h);
    const double res = d2 + 4.0 / x * p.derivative(x) + nl.f(p.value(x));
    CHECK(std::abs(res) <= 1e-5 * (std::abs(d2) + nl.f(p.value(x))) + 1e-14);
  }
  // analytic tail beyond the grid
  const double far = 10.0 * p.r_end();
  CHECK(p.value(far) == doctest::Approx(p.kappa_inf() * std::pow(far, -3.0)).epsilon(1e-14));
}
