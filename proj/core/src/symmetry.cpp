#include "nodal/symmetry.hpp"

#include <cmath>
#include <numbers>

#include "nodal/errors.hpp"

namespace nodal {

namespace {

constexpr double kPi = std::numbers::pi;

void require_orbit_args(int m, int N) {
  if (m < 2) throw DomainError("orbit needs m >= 2");
  if (N < 5) throw DomainError("orbit needs N >= 5");
}

}  // namespace

OrbitConfig orbit_points(int m, int N) {
  require_orbit_args(m, N);
  OrbitConfig o;
  o.m = m;
  o.N = N;
  o.points.assign(2 * m, Point(N, 0.0));
  o.signs.assign(2 * m, 1);
  for (int i = 0; i < m; ++i) {
    const double a = 2.0 * kPi * i / m;
    o.points[i][0] = std::cos(a);
    o.points[i][1] = std::sin(a);
    o.points[m + i][2] = std::cos(a);
    o.points[m + i][3] = std::sin(a);
    o.signs[m + i] = -1;
  }
  // numerical re-check of the orbit geometry
  const auto d = distance_matrix(o);
  for (int i = 0; i < 2 * m; ++i) {
    for (int j = 0; j < 2 * m; ++j) {
      const bool same = (i < m) == (j < m);
      const double expect = same ? 2.0 * std::sin(kPi * std::abs((i % m) - (j % m)) / m) : std::sqrt(2.0);
      if (std::abs(d[i][j] - expect) > 1e-12) throw InvariantViolation("orbit distances off");
    }
  }
  return o;
}

std::vector<std::vector<double>> distance_matrix(const OrbitConfig& o) {
  const std::size_t n = o.points.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < o.N; ++k) {
        const double t = o.points[i][k] - o.points[j][k];
        s += t * t;
      }
      d[i][j] = d[j][i] = std::sqrt(s);
    }
  }
  return d;
}

Point rotate(const Point& x, int m) {
  const double c = std::cos(2.0 * kPi / m), s = std::sin(2.0 * kPi / m);
  Point y = x;
  y[0] = c * x[0] - s * x[1];
  y[1] = s * x[0] + c * x[1];
  y[2] = c * x[2] - s * x[3];
  y[3] = s * x[2] + c * x[3];
  return y;
}

Point swap_planes(const Point& x) {
  Point y = x;
  std::swap(y[0], y[2]);
  std::swap(y[1], y[3]);
  return y;
}

double psi_threshold(int N) {
  if (N <= 3) throw DomainError("psi_threshold needs N >= 4");
  return std::sqrt(2.0) * kPi * std::pow(kPi / std::sqrt(2.0), 1.0 / (N - 3));
}

SignCondition sign_condition_exact(int m, int N) {
  require_orbit_args(m, N);
  // Σ_{i≠j} over one block: every i sees each offset k = 1..m-1 once
  double same = 0.0;
  for (int k = 1; k < m; ++k) same += std::pow(2.0 * std::sin(kPi * k / m), 2.0 - N);
  same *= m;
  const double cross = static_cast<double>(m) * m * std::pow(std::sqrt(2.0), 2.0 - N);
  const double v = same - cross;
  return {v, v > 0.0};
}

SignBounds sign_condition_bound(int m, int N) {
  require_orbit_args(m, N);
  const double cross_unit = std::pow(std::sqrt(2.0), 2.0 - N);
  SignBounds b;
  b.neighbor.value = 2.0 * m * std::pow(2.0 * std::sin(kPi / m), 2.0 - N) - static_cast<double>(m) * m * cross_unit;
  b.neighbor.holds = b.neighbor.value >= 0.0;
  b.sin_free.value = m * (2.0 * std::pow(2.0 * kPi / m, 2.0 - N) - m * cross_unit);
  b.sin_free.holds = b.sin_free.value >= 0.0;
  return b;
}

int m_min_exact(int N) {
  if (N < 5) throw DomainError("m_min_exact needs N >= 5");
  for (int m = 2; m <= 1000; ++m) {
    if (sign_condition_exact(m, N).holds) return m;
  }
  throw SearchFailure("no m <= 1000 satisfies the sign condition");
}

}  // namespace nodal
