#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nodal/model.hpp"
#include "nodal/quadrature.hpp"
#include "nodal/radial_ode.hpp"

namespace nodal {

// ---------------------------------------------------------------------------
// interaction scaling

struct CmConfig {
  int N = 5;
  std::vector<Point> points;    // y_i, 2 or 3 of them
  std::vector<double> thetas;   // θ_i
};

/// μ = min{θ - max θ_i, θ - N} with θ = Σθ_i.
double cm_exponent(const std::vector<double>& thetas, int N);

struct CmResult {
  double mu = 0.0;
  double d = 0.0;                   // least distance between the y_i
  std::vector<double> R, values;    // I(R) along the ladder
  double fitted_exponent = 0.0;     // slope of log I against log R
  double C_fitted = 0.0;            // max over the ladder of I R^μ d^μ
  double ratio_spread = 0.0;        // max / min of I R^μ d^μ
  bool pass = false;
};

/// I(R) = ∫ Π (1 + |x - R y_i|)^{-θ_i} dx over the ladder. Passes when the
/// fitted slope is at most -0.95 μ and I R^μ d^μ varies by at most a factor 4.
CmResult check_interaction_decay(const CmConfig& config, const std::vector<double>& R_ladder, double rel_tol = 1e-8);

/// Random configuration with unit-scale distinct points, θ_i away from N
/// (|θ_i - N| ≥ 0.4) and μ ≥ 1.
CmConfig random_cm_config(int n, int N, std::uint64_t seed);

std::vector<double> default_cm_ladder();

// ---------------------------------------------------------------------------
// pointwise inequalities

/// |t f(u) - f(tu)| / (|t-1| |u|^{2*-1}); 0 when |t-1| < 1e-6 or the
/// denominator is below 1e-14.
double cmp_ratio(const Nonlinearity& nl, double t, double u);

/// |f(Σu) - Σf(u_i)| / Σ_{i<j} |u_i u_j|^β; 0 for degenerate denominators.
double f_ratio(const Nonlinearity& nl, std::span<const double> u, double beta);

/// |F(Σu) - ΣF(u_i) - Σ_{i≠j} f(u_i) u_j| against
/// Σ_{i<j} |u_i u_j|^{1+β/2} + Σ_{i<j, k∉{i,j}} |u_i u_j|^β |u_k|.
double acp2_ratio(const Nonlinearity& nl, std::span<const double> u, double beta);

struct SupResult {
  double sup = 0.0;        // running sup after all samples
  double sup_half = 0.0;   // running sup after the first half
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t excluded = 0;  // degenerate samples
  std::optional<double> grid_sup;  // dense-grid cross-check (acp2, n = 2)
  bool pass = false;
};

/// Samples t ∈ [0, 2], u ∈ [-10, 10].
SupResult check_scaling_defect(const Nonlinearity& nl, std::size_t n_samples, std::uint64_t seed);

/// Samples u ∈ [-u_bar, u_bar]^n, half uniform and half with random support,
/// signs and magnitudes.
SupResult check_force_splitting(const Nonlinearity& nl, int n, double u_bar, double beta, std::size_t n_samples,
                        std::uint64_t seed);

/// As check_force_splitting; for n = 2 also takes the sup over a 400 x 400 grid,
/// which must agree with the sampled sup within 10%.
SupResult check_energy_splitting(const Nonlinearity& nl, int n, double u_bar, double beta, std::size_t n_samples,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// decay facts

struct DecayBounds {
  double b1 = 0.0;  // inf ω (1+r)^{N-2}
  double b2 = 0.0;  // sup ω (1+r)^{N-2}
  double b3 = 0.0;  // sup |ω'| (1+r)^{N-1}
  bool pass = false;
};

/// Extremal constants over the grid and the analytic tail.
DecayBounds check_decay_bounds(const RadialProfile& profile);

struct TailCheck {
  bool pass = false;
  std::optional<double> first_violation;
};

/// 1/(r^{N-2} ω) nonincreasing on r ≥ 1, per-step tolerance 1e-8.
TailCheck check_tail_monotonicity(const RadialProfile& profile);

}  // namespace nodal
