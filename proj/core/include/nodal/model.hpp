#pragma once

#include <memory>
#include <span>
#include <vector>

namespace nodal {

/// Dimension and exponents of the zero-mass problem -Δu = f(u) in ℝᴺ.
///
/// Admissible parameters satisfy N >= 5, 2 < p < 2N/(N-2) < q,
/// alpha in (N/(2(N-2)), 1] and theta > 2.
struct ModelParams {
  int N = 5;
  double p = 3.0;
  double q = 4.0;
  double alpha = 1.0;  // Hölder exponent of f'
  double theta = 3.0;  // Ambrosetti-Rabinowitz constant

  /// 2* = 2N/(N-2).
  double critical_exponent() const { return 2.0 * N / (N - 2.0); }

  /// Throws DomainError naming the first violated condition.
  void validate() const;
};

/// Builds validated parameters for the built-in family (alpha = 1, theta = p).
ModelParams make_params(int N, double p, double q);

enum class NonlinearityKind {
  Family,     // |s|^{q-2}s / (1 + |s|^{q-p})
  PurePower,  // |s|^{e-2}s, used for quadrature and ODE tests
  Zero,       // f = 0, ODE test stub
};

class AntiderivativeTable;

/// The nonlinearity f together with f' and F(s) = ∫₀ˢ f.
///
/// Immutable after construction; copies share the antiderivative table, and
/// all evaluation methods are safe to call concurrently.
class Nonlinearity {
 public:
  static Nonlinearity family(const ModelParams& params);
  static Nonlinearity pure_power(int N, double exponent);
  static Nonlinearity zero(int N);

  NonlinearityKind kind() const { return kind_; }
  int dimension() const { return N_; }
  /// Parameters of the built-in family. For test stubs p = q = exponent.
  const ModelParams& params() const { return params_; }

  double f(double s) const;
  double fprime(double s) const;
  double F(double s) const;

  /// Exponent e with f(s) ~ |s|^{e-1} as s -> 0 (q for the family).
  double small_amplitude_exponent() const;
  /// Exponent e with f(s) ~ |s|^{e-1} as s -> ∞ (p for the family).
  double large_amplitude_exponent() const;

 private:
  Nonlinearity() = default;

  NonlinearityKind kind_ = NonlinearityKind::Zero;
  int N_ = 5;
  ModelParams params_{};
  std::shared_ptr<const AntiderivativeTable> table_;
};

/// Cached antiderivative of the family on a log-spaced grid.
///
/// Below s_min a convergent power series is used, above s_max the large-s
/// series F(s) = F(s_max) + Σ_k (-1)^k ∫ t^{p-1-kδ}, δ = q - p, truncated when
/// the next term falls below 1e-17 of the sum (alternating with ratio
/// <= s_max^{-δ} <= 0.1, so the truncation error is bounded by that term).
/// In between, quintic Hermite interpolation in u = ln s using F, dF/du and
/// d²F/du², whose nodal values come from 8-point Gauss-Legendre panels.
class AntiderivativeTable {
 public:
  explicit AntiderivativeTable(const ModelParams& params);

  double operator()(double s) const;  // s >= 0
  double s_min() const { return s_min_; }
  double s_max() const { return s_max_; }
  std::size_t size() const { return F_.size(); }

 private:
  double small_series(double s) const;
  double large_series(double s) const;
  double f(double s) const;
  double fprime(double s) const;

  double p_, q_, delta_;
  double s_min_, s_max_;
  double u0_, h_;
  std::vector<double> F_, dF_, d2F_;
};

struct GrowthReport {
  double a1 = 0.0;             // least constant making all sampled bounds hold
  double a1_antiderivative = 0.0;  // κ = -1
  double a1_value = 0.0;           // κ = 0
  double a1_derivative = 0.0;      // κ = 1
  std::size_t n_samples = 0;
  bool pass = false;
};

/// Fits the growth constant a₁ in |f^{(κ)}(s)| <= a₁|s|^{p-(κ+1)} (|s| >= 1)
/// and a₁|s|^{q-(κ+1)} (|s| <= 1) for κ = -1, 0, 1.
GrowthReport check_growth_bounds(const Nonlinearity& nl, std::span<const double> s_samples);

struct StructureReport {
  double min_gap_ar = 0.0;        // min over samples of f(s)s - θF(s)
  double min_gap_convex = 0.0;    // min over samples of f'(s)s² - f(s)s
  double min_rel_gap_ar = 0.0;    // same, divided by f(s)s
  double min_rel_gap_convex = 0.0;
  double min_ratio = 0.0;         // min f'(s)s²/(f(s)s)
  double max_ratio = 0.0;
  std::size_t n_samples = 0;
  bool pass = false;
};

/// Checks 0 <= θF(s) <= f(s)s < f'(s)s² at every sample s > 0 with θ = params().theta.
StructureReport check_structure(const Nonlinearity& nl, std::span<const double> s_samples);

/// n log-spaced samples on [lo, hi].
std::vector<double> log_samples(double lo, double hi, std::size_t n);

}  // namespace nodal
