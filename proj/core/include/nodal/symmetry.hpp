#pragma once

#include <vector>

#include "nodal/quadrature.hpp"

namespace nodal {

/// Orbit of ζ = (1, 0, 0) ∈ ℂ×ℂ×ℝ^{N-4} under the group generated by the
/// rotations e^{2πij/m} (acting on both complex factors) and the swap τ.
/// Coordinates are (Re z1, Im z1, Re z2, Im z2, y...).
struct OrbitConfig {
  int m = 0;
  int N = 0;
  std::vector<Point> points;  // ζ_1 .. ζ_2m
  std::vector<int> signs;     // +1 for the first block, -1 for the swapped block
};

OrbitConfig orbit_points(int m, int N);

std::vector<std::vector<double>> distance_matrix(const OrbitConfig& orbit);

/// Action of the generator e^{2πi/m}; φ = +1.
Point rotate(const Point& x, int m);
/// Action of τ; φ = -1.
Point swap_planes(const Point& x);

/// ψ(N) = √2 π (π/√2)^{1/(N-3)}. Throws DomainError for N <= 3.
double psi_threshold(int N);

struct SignCondition {
  double value = 0.0;
  bool holds = false;
};

/// S(m,N) = Σ_{i≠j<=m} (2 sin(π|i-j|/m))^{2-N} - m² (√2)^{2-N}; holds iff S > 0.
SignCondition sign_condition_exact(int m, int N);

struct SignBounds {
  SignCondition neighbor;  // 2m (2 sin(π/m))^{2-N} - m² (√2)^{2-N}
  SignCondition sin_free;  // m [2 (2π/m)^{2-N} - m (√2)^{2-N}]
};

SignBounds sign_condition_bound(int m, int N);

/// Least m >= 2 with a positive exact sign condition (searched up to 1000).
int m_min_exact(int N);

}  // namespace nodal
