#pragma once

// Quintic Hermite interpolation on one interval from value, first and second
// derivative at both ends. t in [0,1], h the interval length.

namespace nodal::detail {

struct HermiteNode {
  double y, dy, d2y;
};

inline double quintic_value(const HermiteNode& a, const HermiteNode& b, double h, double t) {
  const double s = 1.0 - t;
  const double t3 = t * t * t, s3 = s * s * s;
  const double h0t = 1.0 - t3 * (10.0 - 15.0 * t + 6.0 * t * t);
  const double h0s = 1.0 - s3 * (10.0 - 15.0 * s + 6.0 * s * s);
  const double h1t = t - t3 * (6.0 - 8.0 * t + 3.0 * t * t);
  const double h1s = s - s3 * (6.0 - 8.0 * s + 3.0 * s * s);
  const double h2t = 0.5 * t * t - t3 * (1.5 - 1.5 * t + 0.5 * t * t);
  const double h2s = 0.5 * s * s - s3 * (1.5 - 1.5 * s + 0.5 * s * s);
  return a.y * h0t + b.y * h0s + h * (a.dy * h1t - b.dy * h1s) + h * h * (a.d2y * h2t + b.d2y * h2s);
}

inline double quintic_derivative(const HermiteNode& a, const HermiteNode& b, double h, double t) {
  const double s = 1.0 - t;
  auto d0 = [](double x) { return -30.0 * x * x * (1.0 - 2.0 * x + x * x); };
  auto d1 = [](double x) { return 1.0 - x * x * (18.0 - 32.0 * x + 15.0 * x * x); };
  auto d2 = [](double x) { return x - x * x * (4.5 - 6.0 * x + 2.5 * x * x); };
  const double dt = a.y * d0(t) - b.y * d0(s) + h * (a.dy * d1(t) + b.dy * d1(s)) +
                    h * h * (a.d2y * d2(t) - b.d2y * d2(s));
  return dt / h;
}

}  // namespace nodal::detail
