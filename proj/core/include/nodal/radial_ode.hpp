#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nodal/model.hpp"
#include "nodal/quadrature.hpp"

namespace nodal {

enum class ShotKind { Crossing, SlowDecay, FastDecay, Undecided };

const char* to_string(ShotKind kind);

struct ShotClassification {
  ShotKind kind = ShotKind::Undecided;
  std::optional<double> crossing_radius;
  double tail_slope = 0.0;  // least-squares d ln ω / d ln r over the last decade
};

/// Samples of a radial solution at the accepted integrator steps (r = 0 first).
struct Trajectory {
  std::vector<double> r;
  std::vector<double> omega;
  std::vector<double> omega_prime;
};

struct ShotResult {
  Trajectory trajectory;
  ShotClassification classification;
  double r_final = 0.0;  // last radius actually integrated to
};

/// Natural length of the shot with amplitude a: sqrt(2N a / |f(a)|) (1 if f(a) = 0).
double shot_scale(const Nonlinearity& nl, double a);

/// Integrates ω'' + (N-1)/r ω' + f(ω) = 0, ω(0) = a, ω'(0) = 0 up to r_max or
/// the first zero of ω, with relative tolerance tol.
///
/// Slopes within ±10% of -(N-2) classify as FastDecay, within ±10% of
/// -2/(q-2) as SlowDecay. An undecided window is extended once by a factor 4.
/// If ω + rω'/(N-2) turns negative before r_max a later zero is guaranteed and
/// integration continues until it is found.
ShotResult integrate_ivp(const Nonlinearity& nl, double a, double r_max, double tol);

/// Crossing / SlowDecay / Undecided as used by the bisection: the window is
/// extended by factors of 4 until the amplitude is decided (or r = 1e60·scale).
ShotKind classify_amplitude(const Nonlinearity& nl, double a, double rtol);

/// Layout r_k = k·h0 for k <= n_uniform, then r_{n_uniform}·ratio^j.
struct GridLayout {
  std::size_t n_uniform = 0;
  double h0 = 0.0;
  double ratio = 1.0;
};

/// Radial profile tabulated on a grid, with quintic Hermite interpolation and
/// the analytic continuation κ∞ r^{2-N} beyond the last grid radius.
class RadialProfile {
 public:
  /// Profile from an accurate solve: ω'' must be supplied.
  static RadialProfile from_solution(const ModelParams& params, std::vector<double> r,
                                     std::vector<double> omega, std::vector<double> omega_prime,
                                     std::vector<double> omega_second, double a_star,
                                     std::optional<GridLayout> layout = std::nullopt);
  /// Profile from samples only (r[0] = 0); ω'' is estimated by finite differences of ω'.
  static RadialProfile from_samples(const ModelParams& params, std::vector<double> r,
                                    std::vector<double> omega, std::vector<double> omega_prime);

  /// Copy carrying the ground state energy.
  RadialProfile with_energy(double c0) const;

  double value(double r) const;
  double derivative(double r) const;

  int dimension() const { return params_.N; }
  const ModelParams& params() const { return params_; }
  const std::vector<double>& grid() const { return r_; }
  const std::vector<double>& omega() const { return omega_; }
  const std::vector<double>& omega_prime() const { return omega_prime_; }
  const std::vector<double>& omega_second() const { return omega_second_; }
  double a_star() const { return a_star_; }
  double kappa_inf() const { return kappa_inf_; }
  double kappa_residual() const { return kappa_residual_; }
  double c0() const { return c0_; }  // NaN until computed
  double r_end() const { return r_.back(); }
  bool fast_lookup() const { return layout_.has_value(); }
  /// Width of the core region (uniform part of the grid; 1 for sampled stubs).
  double scale() const;

 private:
  RadialProfile() = default;
  void finish();
  std::size_t interval(double r) const;

  ModelParams params_{};
  std::vector<double> r_, omega_, omega_prime_, omega_second_;
  double a_star_ = 0.0;
  double kappa_inf_ = 0.0;
  double kappa_residual_ = 0.0;
  double c0_ = 0.0;
  std::optional<GridLayout> layout_;
  double log_ratio_ = 0.0;
};

struct ShootOptions {
  double a_lo = 0.0;  // a_lo = a_hi = 0: automatic bracket search from a = 1
  double a_hi = 0.0;
  double tol_a = 1e-14;  // relative bracket width
  double rtol = 1e-13;
  double r_max = 1e3;
  int points_per_decade = 200;
  int core_points = 100;  // uniform points on [0, scale]
  int max_bisections = 200;
  double tail_agreement = 1e-8;
};

struct ShootReport {
  RadialProfile profile;
  double a_lo = 0.0;
  double a_hi = 0.0;
  bool crossing_above = true;  // amplitudes above a* cross
  int bisections = 0;
  ShotClassification classification;
};

/// Ground state by bisection between a crossing and a slowly decaying shot.
/// The returned profile carries κ∞ and c0.
ShootReport shoot_ground_state(const Nonlinearity& nl, const ShootOptions& options = {});

/// |S^{N-1}| ∫ (½ω'² - F(ω)) r^{N-1} dr. Throws InvariantViolation if negative.
double energy_c0(const RadialProfile& profile, const Nonlinearity& nl);

struct DecayFit {
  double kappa_inf = 0.0;
  double relative_residual = 0.0;  // RMS fit residual over κ∞
  double exponent = 1.0;           // β of the correction r^{-β}
};

/// Limit of r^{N-2}ω over the last decade of the grid by Richardson
/// extrapolation: the correction exponent β is estimated from three points of
/// the decade, then κ∞ + c1 r^{-β} + c2 r^{-2β} is fitted by least squares. Throws InvariantViolation if 1/(r^{N-2}ω) increases
/// on r >= 1 by more than 1e-8 relative per step.
DecayFit decay_constant(const RadialProfile& profile);
/// Limit of y(x) as x -> ∞ assuming y = L + c x^{-β} + ...: β from the first,
/// middle and last sample, then a least-squares fit with `terms` powers of
/// x^{-β} (1 to 3). The limit is returned in kappa_inf.
DecayFit richardson_limit(const std::vector<double>& x, const std::vector<double>& y, int terms);

/// The same fit without the monotonicity check.
DecayFit fit_decay_constant(const std::vector<double>& r, const std::vector<double>& omega, int N);

/// First grid radius r >= 1 where v = 1/(r^{N-2}ω) grows by more than tol
/// relative to the previous grid point, if any.
std::optional<double> first_tail_violation(const RadialProfile& profile, double tol = 1e-8);

/// Least-squares slope of ln ω against ln r over [r_lo, r_hi].
double fit_log_slope(const std::vector<double>& r, const std::vector<double>& omega, double r_lo,
                     double r_hi);

/// Uniform-then-geometric layout of a grid, if it has one (relative tolerance 1e-10).
std::optional<GridLayout> detect_layout(const std::vector<double>& r);

struct Residuals {
  double nehari = 0.0;
  double pohozaev = 0.0;
  double norm_sq = 0.0;       // ‖ω‖² = ∫|∇ω|²
  double f_omega_omega = 0.0;  // ∫ f(ω)ω
  double F_omega = 0.0;        // ∫ F(ω)
};

Residuals pohozaev_nehari_residuals(const RadialProfile& profile, const Nonlinearity& nl);

}  // namespace nodal
