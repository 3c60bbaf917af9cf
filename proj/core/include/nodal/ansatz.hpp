#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodal/quadrature.hpp"
#include "nodal/radial_ode.hpp"
#include "nodal/symmetry.hpp"

namespace nodal {

/// Signed sum of translated ground states σ̂_R(x) = Σ_i s_i ω(|x - R ζ_i|).
class AnsatzState {
 public:
  AnsatzState(std::shared_ptr<const RadialProfile> profile, const OrbitConfig& orbit, double R);
  /// Arbitrary unit points and signs (used for the single-bump case and sign checks).
  AnsatzState(std::shared_ptr<const RadialProfile> profile, std::vector<Point> unit_points,
              std::vector<int> signs, double R);

  static AnsatzState single_bump(std::shared_ptr<const RadialProfile> profile, double R);

  double sigma_hat(std::span<const double> x) const;

  const RadialProfile& profile() const { return *profile_; }
  std::shared_ptr<const RadialProfile> profile_ptr() const { return profile_; }
  const std::vector<Point>& centers() const { return centers_; }
  const std::vector<Point>& unit_points() const { return unit_points_; }
  const std::vector<int>& signs() const { return signs_; }
  std::size_t copies() const { return centers_.size(); }
  int dimension() const { return profile_->dimension(); }
  double R() const { return R_; }
  double t_R() const { return t_R_; }  // NaN until the Nehari scale is fixed
  AnsatzState with_t(double t) const;

  /// Distinct unit-point distances d with weights Σ_{i≠j, |ζi-ζj|=d} s_i s_j.
  struct PairClass {
    double distance;
    double weight;
    std::size_t count;
  };
  const std::vector<PairClass>& pair_classes() const { return pairs_; }

 private:
  void build();

  std::shared_ptr<const RadialProfile> profile_;
  std::vector<Point> unit_points_, centers_;
  std::vector<int> signs_;
  double R_ = 0.0;
  double t_R_;
  std::vector<PairClass> pairs_;
};

struct AnsatzOptions {
  std::size_t mc_samples = 1000000;
  std::uint64_t seed = 0;
  double rel_tol = 1e-10;  // pairwise quadrature
  double root_tol = 1e-14;
};

/// I(s) = ∫ f(ω(x)) ω(x - y) dx, |y| = s.
IntegralEstimate interaction_integral(const RadialProfile& profile, const Nonlinearity& nl, double s,
                                      double rel_tol = 1e-10);

/// Σ_{i≠j} s_i s_j ∫ f(ω_i) ω_j for the state's centres.
IntegralEstimate interaction_sum(const AnsatzState& state, const Nonlinearity& nl, double rel_tol = 1e-10);

struct NehariResult {
  double t = 0.0;
  double residual = 0.0;       // |h(t)| / ‖σ̂‖²
  double norm_sq = 0.0;        // ‖σ̂‖² = copies·‖ω‖² + L
  IntegralEstimate interaction;  // L
  int iterations = 0;
};

/// Root of h(t) = t²‖σ̂‖² - ∫f(tσ̂)tσ̂ on [0.5, 2]. The single-copy part of the
/// nonlinear term is radial; the remainder is Monte Carlo with the same
/// samples for every t. Throws BracketError without a sign change.
NehariResult nehari_scale(const AnsatzState& state, const Nonlinearity& nl, const AnsatzOptions& opts);

struct EnergyDecomposition {
  double t = 0.0;
  double single_energy = 0.0;      // copies · J(tω)
  IntegralEstimate interaction;    // L
  IntegralEstimate leading;        // -(t²/2) L
  IntegralEstimate scaling_term;   // Σ s_i s_j ∫ [t² f(ω_i) - t f(tω_i)] ω_j
  IntegralEstimate nonadditive;    // ∫ F(tσ̂) - Σ F(tω_i) - Σ f(tω_i)(tσ̂ - tω_i)
  IntegralEstimate J;              // single_energy + leading + scaling_term - nonadditive
  IntegralEstimate margin;         // copies·c0 - J
};

EnergyDecomposition energy_decomposed(const AnsatzState& state, const Nonlinearity& nl,
                                      const AnsatzOptions& opts);

/// ½t²‖σ̂‖² - ∫F(tσ̂), the last term by plain Monte Carlo.
IntegralEstimate energy_direct(const AnsatzState& state, const Nonlinearity& nl, std::size_t n_samples,
                               std::uint64_t seed, double rel_tol = 1e-10);

struct C0Result {
  double C0 = 0.0;          // fitted limit of s^{N-2} I(s)
  double C0_check = 0.0;    // κ∞ ∫ f(ω)
  double C0_hat = 0.0;      // fitted limit for the kernel ω^{2*-1}
  double C0_hat_check = 0.0;
  double relative_difference = 0.0;
  double fit_residual = 0.0;
  bool convergence_warning = false;  // fit residual above 5%
  std::vector<double> separations, scaled_values;
};

C0Result C0_limit(const RadialProfile& profile, const Nonlinearity& nl, std::vector<double> separations = {});

struct Majorants {
  double scaling_bound = 0.0;        // C1 Ĉ0 t |t-1| Σ (R d_ij)^{2-N}
  IntegralEstimate pair_sum;   // Σ_{i≠j} ∫ |ω_i ω_j|^{1+α/2}
  IntegralEstimate triple_sum; // Σ_{i<j, k∉{i,j}} ∫ |ω_i ω_j|^α |ω_k|
};

Majorants remainder_majorants(const AnsatzState& state, double C1, double C0_hat, double alpha,
                              double rel_tol = 1e-6);

struct BoundRow {
  double R = 0.0;
  double t_R = 0.0;
  double J_decomposed = 0.0, J_decomposed_err = 0.0;
  double J_direct = 0.0, J_direct_err = 0.0;
  double bound_2mc0 = 0.0;
  double margin = 0.0;
  double interaction = 0.0;  // L
  double nehari_residual = 0.0;
  bool methods_agree = false;  // |J_dec - J_dir| <= 3 combined σ
};

struct BoundReport {
  int N = 0, m = 0;
  double c0 = 0.0;
  std::vector<BoundRow> rows;
  std::optional<double> least_certified_R;  // J + 3σ < 2m c0
  bool chain_lower = false;                 // J - 3σ > 2 c0 at the certified point
  double leading_exponent = 0.0;            // fitted slope of log L against log R
  bool t_monotone = false;                  // |t_R - 1| strictly decreasing
  bool certified() const { return least_certified_R.has_value(); }
};

/// Energy curve over the R ladder. Throws DomainError if the exact sign
/// condition fails for (m, N).
BoundReport bound_check(std::shared_ptr<const RadialProfile> profile, const Nonlinearity& nl, int m,
                        const std::vector<double>& R_ladder, const AnsatzOptions& opts);

/// CSV with columns R,t_R,J_decomposed,J_decomposed_err,J_direct,J_direct_err,bound_2mc0,margin.
std::string energy_curve_csv(const BoundReport& report);

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nodal
