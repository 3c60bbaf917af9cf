#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nodal {

enum class IntegralMethod { Radial1D, Reduced2D, Reduced3D, MonteCarlo };

const char* to_string(IntegralMethod method);

struct IntegralEstimate {
  double value = 0.0;
  double abs_error = 0.0;  // quadrature error bound or MC standard error
  IntegralMethod method = IntegralMethod::Radial1D;
  std::size_t n_evals = 0;
};

IntegralEstimate operator+(const IntegralEstimate& a, const IntegralEstimate& b);
IntegralEstimate operator*(double c, const IntegralEstimate& a);

using RadialFn = std::function<double(double)>;
using Point = std::vector<double>;

/// Radial function with its power law g(r) ~ r^{tail_exponent} at infinity.
struct RadialTerm {
  RadialFn g;
  double tail_exponent = -1e300;  // very negative for faster-than-power decay
};

/// |S^{N-1}| = 2π^{N/2}/Γ(N/2).
double sphere_area(int N);

struct QuadratureOptions {
  double scale = 1.0;      // length over which the integrands vary near their centre
  double rel_tol = 1e-10;
  std::vector<double> breakpoints;  // extra radii for radial_integral
};

/// ∫_{ℝᴺ} g(|x|) dx = |S^{N-1}| ∫₀^∞ g(r) r^{N-1} dr by adaptive Gauss-Kronrod on
/// doubling panels, closed with the power-law tail g ~ r^{tail_exponent}.
/// Throws DomainError if tail_exponent >= -N.
IntegralEstimate radial_integral(const RadialFn& g, int N, double tail_exponent,
                                 const QuadratureOptions& opts = {});

/// ∫ gA(|x|) gB(|x - y|) dx with |y| = separation.
///
/// Each Voronoi half-space is written in polar coordinates about its own
/// centre, which turns the integral into |S^{N-2}| ∫dr r^{N-1} ∫dθ sin^{N-2}θ (...).
IntegralEstimate two_center_integral(const RadialTerm& gA, const RadialTerm& gB, double separation,
                                     int N, const QuadratureOptions& opts = {});

/// ∫ g1(|x - c1|) g2(|x - c2|) g3(|x - c3|) dx over ℝᴺ.
///
/// Each Voronoi cell is parametrised about its centre by (φ, ψ, ρ): φ the angle in
/// the plane of the centres, ψ the elevation out of it and ρ the distance, with
/// volume element |S^{N-3}| ρ^{N-1} cos ψ sin^{N-3} ψ. Coincident centres are merged.
IntegralEstimate three_center_integral(const std::array<RadialTerm, 3>& g,
                                       const std::array<Point, 3>& centers, int N,
                                       const QuadratureOptions& opts = {});

using FieldFn = std::function<double(std::span<const double>)>;

struct McOptions {
  std::size_t n_samples = 1000000;
  std::uint64_t seed = 0;
  double scale = 1.0;  // ℓ of the proposal (1 + |x - c|/ℓ)^{-s}
  std::size_t block_size = 4096;
};

/// decay_exponent below is the positive rate d with h(x) ~ |x|^{-d}.
/// Proposal tail exponent s = clamp(d, N + 1/2, N + 2).
double mc_proposal_exponent(double decay_exponent, int N);

/// Density of the equal-weight proposal mixture at x.
double mc_proposal_density(std::span<const double> x, const std::vector<Point>& centers,
                           double decay_exponent, double scale);

/// Importance-sampled ∫_{ℝᴺ} h(x) dx, stratified by mixture component.
///
/// Samples are generated in fixed blocks with per-block seeds and reduced in
/// block order, so the result does not depend on the number of workers.
IntegralEstimate mc_full_integral(const FieldFn& h, const std::vector<Point>& centers,
                                  double decay_exponent, const McOptions& opts);

/// Stored proposal draws for estimates that reuse one sample set, e.g. a
/// root search over a parameter with common random numbers.
struct McSampleSet {
  std::vector<double> weights;  // 1/q(x_i)
  std::size_t strata = 0, per_stratum = 0, block_size = 0;
  std::size_t size() const { return weights.size(); }
};

/// Number of samples actually drawn (n_samples rounded up to whole strata).
std::size_t mc_sample_count(std::size_t n_centers, const McOptions& opts);

/// Draws the same samples as mc_full_integral with equal options and hands
/// each point to record(index, x).
McSampleSet mc_draw(const std::vector<Point>& centers, double decay_exponent, const McOptions& opts,
                    const std::function<void(std::size_t, std::span<const double>)>& record);

/// Estimate from value(index) at the stored points.
IntegralEstimate mc_reduce(const McSampleSet& set, const std::function<double(std::size_t)>& value);

}  // namespace nodal
