#include "nodal/radial_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "nodal/errors.hpp"
#include "hermite.hpp"

namespace nodal {

namespace {

constexpr double kMaxStep = 0.05;  // in t = ln r
constexpr double kSeriesStart = 1e-4;
constexpr double kClassTol = 0.10;

// Dormand-Prince 5(4) for y1' = y2, y2' = -(N-2) y2 - e^{2t} f(y1).
class LogRadialStepper {
 public:
  LogRadialStepper(const Nonlinearity& nl, double rtol) : nl_(nl), rtol_(rtol), Nm2_(nl.dimension() - 2.0) {}

  void reset(double t, double y1, double y2) {
    t_ = t;
    y_[0] = y1;
    y_[1] = y2;
    rhs(t_, y_, k1_);
    h_ = 1e-3;
  }

  // One accepted step that does not pass t_stop.
  void step(double t_stop) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    bool rejected = false;
    for (;;) {
      double h = std::min({h_, kMaxStep, t_stop - t_});
      const bool clamped = h < h_;
      if (h < 1e-12 * std::max(1.0, std::abs(t_))) {
        throw IntegrationFailure("step size underflow in radial integration");
      }
      double k2[2], k3[2], k4[2], k5[2], k6[2], k7[2], y[2], yn[2];
      for (int i = 0; i < 2; ++i) y[i] = y_[i] + h * a21 * k1_[i];
      rhs(t_ + h / 5.0, y, k2);
      for (int i = 0; i < 2; ++i) y[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
      rhs(t_ + 0.3 * h, y, k3);
      for (int i = 0; i < 2; ++i) y[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(t_ + 0.8 * h, y, k4);
      for (int i = 0; i < 2; ++i) {
        y[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      }
      rhs(t_ + 8.0 / 9.0 * h, y, k5);
      for (int i = 0; i < 2; ++i) {
        y[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      }
      rhs(t_ + h, y, k6);
      for (int i = 0; i < 2; ++i) {
        yn[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
      }
      rhs(t_ + h, yn, k7);
      const double sk = rtol_ * std::max({std::abs(y_[0]), std::abs(y_[1]), std::abs(yn[0]),
                                          std::abs(yn[1])}) +
                        1e-300;
      double err = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double e =
            h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]) / sk;
        err += e * e;
      }
      err = std::sqrt(0.5 * err);
      if (!std::isfinite(err)) err = 1e10;
      if (err <= 1.0) {
        t_prev_ = t_;
        y_prev_[0] = y_[0];
        y_prev_[1] = y_[1];
        k_prev_[0] = k1_[0];
        k_prev_[1] = k1_[1];
        t_ = (h == t_stop - t_) ? t_stop : t_ + h;
        y_[0] = yn[0];
        y_[1] = yn[1];
        k1_[0] = k7[0];
        k1_[1] = k7[1];
        double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
        fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
        if (!clamped) h_ = h * fac;
        return;
      }
      rejected = true;
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }

  // Zero of y1 inside the last step by cubic Hermite interpolation (y1' = y2).
  double locate_zero() const {
    const double h = t_ - t_prev_;
    auto p = [&](double s) {
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * y_prev_[0] + (s3 - 2 * s2 + s) * h * k_prev_[0] +
             (-2 * s3 + 3 * s2) * y_[0] + (s3 - s2) * h * k1_[0];
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (p(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return t_prev_ + 0.5 * (lo + hi) * h;
  }

  double t() const { return t_; }
  double y1() const { return y_[0]; }
  double y2() const { return y_[1]; }
  double r() const { return std::exp(t_); }

 private:
  void rhs(double t, const double* y, double* dy) const {
    dy[0] = y[1];
    dy[1] = -Nm2_ * y[1] - std::exp(2.0 * t) * nl_.f(y[0]);
  }

  const Nonlinearity& nl_;
  double rtol_;
  double Nm2_;
  double t_ = 0.0, h_ = 1e-3;
  double y_[2] = {0, 0}, k1_[2] = {0, 0};
  double t_prev_ = 0.0, y_prev_[2] = {0, 0}, k_prev_[2] = {0, 0};
};

void start_series(const Nonlinearity& nl, double a, double r0, LogRadialStepper& st) {
  const int N = nl.dimension();
  const double fa = nl.f(a);
  st.reset(std::log(r0), a - fa * r0 * r0 / (2.0 * N), -fa * r0 * r0 / N);
}

double slow_target(const Nonlinearity& nl) {
  const double q = nl.small_amplitude_exponent();
  return q > 2.0 ? -2.0 / (q - 2.0) : std::numeric_limits<double>::quiet_NaN();
}

ShotKind classify_slope(const Nonlinearity& nl, double slope) {
  const double fast = -(nl.dimension() - 2.0);
  const double slow = slow_target(nl);
  if (std::abs(slope - fast) <= kClassTol * std::abs(fast)) return ShotKind::FastDecay;
  if (std::isfinite(slow) && std::abs(slope - slow) <= kClassTol * std::abs(slow)) {
    return ShotKind::SlowDecay;
  }
  return ShotKind::Undecided;
}

void require_amplitude(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("shooting amplitude must be finite and > 0");
}

}  // namespace

const char* to_string(ShotKind kind) {
  switch (kind) {
    case ShotKind::Crossing: return "Crossing";
    case ShotKind::SlowDecay: return "SlowDecay";
    case ShotKind::FastDecay: return "FastDecay";
    case ShotKind::Undecided: return "Undecided";
  }
  return "?";
}

double shot_scale(const Nonlinearity& nl, double a) {
  const double fa = std::abs(nl.f(a));
  if (fa == 0.0) return 1.0;
  return std::sqrt(2.0 * nl.dimension() * a / fa);
}

double fit_log_slope(const std::vector<double>& r, const std::vector<double>& omega, double r_lo,
                     double r_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] < r_lo || r[k] > r_hi || !(omega[k] > 0.0)) continue;
    const double x = std::log(r[k]), y = std::log(omega[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double dn = static_cast<double>(n);
  const double den = sxx - sx * sx / dn;
  return den > 0.0 ? (sxy - sx * sy / dn) / den : std::numeric_limits<double>::quiet_NaN();
}

ShotResult integrate_ivp(const Nonlinearity& nl, double a, double r_max, double tol) {
  require_amplitude(a);
  if (!(r_max > 1.0)) throw DomainError("integrate_ivp needs r_max > 1");
  if (!(tol > 0.0)) throw DomainError("integrate_ivp needs tol > 0");
  const int N = nl.dimension();
  const double ell = shot_scale(nl, a);
  const double r0 = std::min(kSeriesStart * ell, 1e-4 * r_max);

  ShotResult res;
  Trajectory& tr = res.trajectory;
  auto push = [&](double r, double w, double wp) {
    tr.r.push_back(r);
    tr.omega.push_back(w);
    tr.omega_prime.push_back(wp);
  };
  push(0.0, a, 0.0);
  LogRadialStepper st(nl, tol);
  start_series(nl, a, r0, st);
  push(r0, st.y1(), st.y2() / r0);

  // Returns true on a zero of ω before t_stop.
  auto run_to = [&](double t_stop) {
    while (st.t() < t_stop) {
      st.step(t_stop);
      if (st.y1() <= 0.0) {
        const double tz = st.locate_zero();
        const double rz = std::exp(tz);
        push(rz, 0.0, st.y2() / st.r());
        res.classification.kind = ShotKind::Crossing;
        res.classification.crossing_radius = rz;
        res.r_final = rz;
        return true;
      }
      push(st.r(), st.y1(), st.y2() / st.r());
    }
    return false;
  };

  if (run_to(std::log(r_max))) return res;
  res.r_final = r_max;
  if (st.y1() + st.y2() / (N - 2.0) < 0.0) {
    // a zero is guaranteed past r_max
    if (run_to(std::log(1e60 * ell))) return res;
    throw IntegrationFailure("crossing certified but not reached");
  }
  double slope = fit_log_slope(tr.r, tr.omega, 0.1 * r_max, r_max);
  ShotKind kind = classify_slope(nl, slope);
  if (kind == ShotKind::Undecided) {
    if (run_to(std::log(4.0 * r_max))) return res;
    res.r_final = 4.0 * r_max;
    slope = fit_log_slope(tr.r, tr.omega, 0.4 * r_max, 4.0 * r_max);
    kind = classify_slope(nl, slope);
  }
  res.classification.kind = kind;
  res.classification.tail_slope = slope;
  return res;
}

ShotKind classify_amplitude(const Nonlinearity& nl, double a, double rtol) {
  require_amplitude(a);
  const int N = nl.dimension();
  const double ell = shot_scale(nl, a);
  LogRadialStepper st(nl, rtol);
  start_series(nl, a, kSeriesStart * ell, st);
  const double slow = slow_target(nl);
  std::vector<double> ts, lw;
  ts.reserve(4096);
  lw.reserve(4096);
  const double t_cap = std::log(1e60 * ell);
  double t_check = std::log(100.0 * ell);
  const double decade = std::log(10.0);
  while (t_check < t_cap) {
    while (st.t() < t_check) {
      st.step(t_check);
      if (st.y1() <= 0.0 || st.y1() + st.y2() / (N - 2.0) < 0.0) return ShotKind::Crossing;
      ts.push_back(st.t());
      lw.push_back(std::log(st.y1()));
    }
    // least-squares slope over the last decade
    const auto first = std::lower_bound(ts.begin(), ts.end(), t_check - decade) - ts.begin();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(ts.size() - first);
    for (std::size_t k = first; k < ts.size(); ++k) {
      sx += ts[k];
      sy += lw[k];
      sxx += ts[k] * ts[k];
      sxy += ts[k] * lw[k];
    }
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    if (std::isfinite(slow) && std::abs(slope - slow) <= kClassTol * std::abs(slow)) {
      return ShotKind::SlowDecay;
    }
    t_check += std::log(4.0);
  }
  return ShotKind::Undecided;
}

// ---------------------------------------------------------------------------
// RadialProfile

std::optional<GridLayout> detect_layout(const std::vector<double>& r) {
  if (r.size() < 4 || r[0] != 0.0) return std::nullopt;
  const double h0 = r[1];
  std::size_t n = 1;
  while (n + 1 < r.size() && std::abs(r[n + 1] - (n + 1) * h0) <= 1e-10 * r[n + 1]) ++n;
  GridLayout lay{n, h0, 1.0};
  if (n + 1 < r.size()) {
    lay.ratio = r[n + 1] / r[n];
    if (!(lay.ratio > 1.0)) return std::nullopt;
    const double lr = std::log(lay.ratio);
    for (std::size_t k = n + 1; k < r.size(); ++k) {
      const double expect = r[n] * std::exp(lr * static_cast<double>(k - n));
      if (std::abs(r[k] - expect) > 1e-10 * r[k]) return std::nullopt;
    }
  }
  return lay;
}

RadialProfile RadialProfile::from_solution(const ModelParams& params, std::vector<double> r,
                                           std::vector<double> omega, std::vector<double> omega_prime,
                                           std::vector<double> omega_second, double a_star,
                                           std::optional<GridLayout> layout) {
  RadialProfile p;
  p.params_ = params;
  p.r_ = std::move(r);
  p.omega_ = std::move(omega);
  p.omega_prime_ = std::move(omega_prime);
  p.omega_second_ = std::move(omega_second);
  p.a_star_ = a_star;
  p.layout_ = layout ? layout : detect_layout(p.r_);
  p.finish();
  return p;
}

RadialProfile RadialProfile::from_samples(const ModelParams& params, std::vector<double> r,
                                          std::vector<double> omega, std::vector<double> omega_prime) {
  const std::size_t M = r.size();
  if (M < 3 || omega.size() != M || omega_prime.size() != M) {
    throw DomainError("profile samples need >= 3 points of equal length");
  }
  if (r[0] != 0.0) throw DomainError("profile samples must start at r = 0");
  std::vector<double> d2(M);
  auto diff3 = [&](std::size_t i0, std::size_t k) {
    // derivative at r[k] of the parabola through i0, i0+1, i0+2
    const double x0 = r[i0], x1 = r[i0 + 1], x2 = r[i0 + 2], x = r[k];
    const double f0 = omega_prime[i0], f1 = omega_prime[i0 + 1], f2 = omega_prime[i0 + 2];
    return f0 * (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
           f1 * (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
           f2 * (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
  };
  for (std::size_t k = 0; k < M; ++k) {
    const std::size_t i0 = k == 0 ? 0 : (k + 1 >= M ? M - 3 : k - 1);
    d2[k] = diff3(i0, k);
  }
  const double a = omega[0];
  return from_solution(params, std::move(r), std::move(omega), std::move(omega_prime), std::move(d2), a,
                       std::nullopt);
}

void RadialProfile::finish() {
  const std::size_t M = r_.size();
  if (M < 3 || omega_.size() != M || omega_prime_.size() != M || omega_second_.size() != M) {
    throw DomainError("profile needs >= 3 grid points with matching columns");
  }
  for (std::size_t k = 0; k + 1 < M; ++k) {
    if (!(r_[k + 1] > r_[k])) throw DomainError("profile grid must be strictly increasing");
  }
  if (r_[0] < 0.0) throw DomainError("profile grid must start at r >= 0");
  if (layout_) {
    log_ratio_ = std::log(layout_->ratio);
    if (layout_->n_uniform >= M) layout_.reset();
  }
  const DecayFit fit = fit_decay_constant(r_, omega_, params_.N);
  kappa_inf_ = fit.kappa_inf;
  kappa_residual_ = fit.relative_residual;
  c0_ = std::numeric_limits<double>::quiet_NaN();
}

RadialProfile RadialProfile::with_energy(double c0) const {
  RadialProfile p = *this;
  p.c0_ = c0;
  return p;
}

double RadialProfile::scale() const {
  if (layout_ && layout_->n_uniform > 0) return layout_->h0 * static_cast<double>(layout_->n_uniform);
  return 1.0;
}

std::size_t RadialProfile::interval(double r) const {
  const std::size_t last = r_.size() - 2;
  std::size_t k;
  if (layout_) {
    const double rs = r_[layout_->n_uniform];
    double x;
    if (r < rs) {
      x = r / layout_->h0;
    } else {
      x = static_cast<double>(layout_->n_uniform) + std::log(r / rs) / log_ratio_;
    }
    k = x <= 0.0 ? 0 : std::min(static_cast<std::size_t>(x), last);
    while (k > 0 && r_[k] > r) --k;
    while (k < last && r_[k + 1] <= r) ++k;
  } else {
    const auto it = std::upper_bound(r_.begin(), r_.end(), r);
    k = it == r_.begin() ? 0 : static_cast<std::size_t>(it - r_.begin()) - 1;
    k = std::min(k, last);
  }
  return k;
}

double RadialProfile::value(double r) const {
  r = std::abs(r);
  if (r >= r_.back()) return kappa_inf_ * std::pow(r, 2.0 - params_.N);
  const std::size_t k = interval(r);
  const double h = r_[k + 1] - r_[k];
  const detail::HermiteNode a{omega_[k], omega_prime_[k], omega_second_[k]};
  const detail::HermiteNode b{omega_[k + 1], omega_prime_[k + 1], omega_second_[k + 1]};
  return detail::quintic_value(a, b, h, (r - r_[k]) / h);
}

double RadialProfile::derivative(double r) const {
  r = std::abs(r);
  if (r >= r_.back()) return -(params_.N - 2.0) * kappa_inf_ * std::pow(r, 1.0 - params_.N);
  const std::size_t k = interval(r);
  const double h = r_[k + 1] - r_[k];
  const detail::HermiteNode a{omega_[k], omega_prime_[k], omega_second_[k]};
  const detail::HermiteNode b{omega_[k + 1], omega_prime_[k + 1], omega_second_[k + 1]};
  return detail::quintic_derivative(a, b, h, (r - r_[k]) / h);
}

// ---------------------------------------------------------------------------
// decay constant

namespace {

// Exponent β of y(r) = κ + c r^{-β} through three samples r1 < r2 < r3.
double richardson_exponent(double r1, double y1, double r2, double y2, double r3, double y3) {
  const double d12 = y2 - y1, d23 = y3 - y2;
  if (d12 == 0.0 || d23 == 0.0 || (d12 > 0.0) != (d23 > 0.0)) return 1.0;
  const double target = d12 / d23;
  auto g = [&](double b) {
    return (std::pow(r1, -b) - std::pow(r2, -b)) / (std::pow(r2, -b) - std::pow(r3, -b)) - target;
  };
  double lo = 0.25, hi = 30.0;
  if (g(lo) * g(hi) > 0.0) return 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((g(mid) > 0.0) == (g(lo) > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

namespace {

// least squares in z = (x_0/x)^β: y = L + c1 z + c2 z²; returns {L, RMS residual}
std::pair<double, double> power_fit(const std::vector<double>& x, const std::vector<double>& y, std::size_t n,
                                    int terms, double beta) {
  const double x0 = x[0];
  double A[3][3] = {}, rhs[3] = {};
  for (std::size_t k = 0; k < n; ++k) {
    const double z = std::pow(x0 / x[k], beta);
    const double phi[3] = {1.0, z, z * z};
    for (int i = 0; i < terms; ++i) {
      rhs[i] += phi[i] * y[k];
      for (int j = 0; j < terms; ++j) A[i][j] += phi[i] * phi[j];
    }
  }
  double c[3] = {0, 0, 0};
  for (int col = 0; col < terms; ++col) {
    int piv = col;
    for (int row = col + 1; row < terms; ++row) {
      if (std::abs(A[row][col]) > std::abs(A[piv][col])) piv = row;
    }
    std::swap(A[col], A[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (int row = col + 1; row < terms; ++row) {
      const double m = A[row][col] / A[col][col];
      for (int j = col; j < terms; ++j) A[row][j] -= m * A[col][j];
      rhs[row] -= m * rhs[col];
    }
  }
  for (int i = terms - 1; i >= 0; --i) {
    double acc = rhs[i];
    for (int j = i + 1; j < terms; ++j) acc -= A[i][j] * c[j];
    c[i] = acc / A[i][i];
  }
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = std::pow(x0 / x[k], beta);
    const double d = y[k] - (c[0] + c[1] * z + c[2] * z * z);
    ss += d * d;
  }
  return {c[0], std::sqrt(ss / static_cast<double>(n))};
}

}  // namespace

DecayFit richardson_limit(const std::vector<double>& x, const std::vector<double>& y, int terms) {
  DecayFit fit;
  const std::size_t n = std::min(x.size(), y.size());
  if (n == 0) return fit;
  if (n < 3) {
    fit.kappa_inf = y[n - 1];
    fit.relative_residual = std::numeric_limits<double>::infinity();
    return fit;
  }
  terms = std::clamp(terms, 1, 3);
  if (static_cast<std::size_t>(terms) + 1 > n) terms = static_cast<int>(n) - 1;
  fit.exponent = richardson_exponent(x[0], y[0], x[n / 2], y[n / 2], x[n - 1], y[n - 1]);
  auto [L, rms] = power_fit(x, y, n, terms, fit.exponent);

  // with spare points, refine β by minimising the residual around the three-point estimate
  if (terms >= 2 && n >= static_cast<std::size_t>(terms) + 2 && std::isfinite(fit.exponent) && fit.exponent > 0.0) {
    const auto best = boost::math::tools::brent_find_minima(
        [&](double b) { return power_fit(x, y, n, terms, b).second; }, 0.5 * fit.exponent, 2.0 * fit.exponent, 40);
    const auto [L2, rms2] = power_fit(x, y, n, terms, best.first);
    if (rms2 < rms) {
      fit.exponent = best.first;
      L = L2;
      rms = rms2;
    }
  }
  fit.kappa_inf = L;
  fit.relative_residual = L != 0.0 ? rms / std::abs(L) : std::numeric_limits<double>::infinity();
  return fit;
}

DecayFit fit_decay_constant(const std::vector<double>& r, const std::vector<double>& omega, int N) {
  const double r_lo = 0.1 * r.back();
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] < r_lo || r[k] <= 0.0) continue;
    xs.push_back(r[k]);
    ys.push_back(std::pow(r[k], N - 2.0) * omega[k]);
  }
  if (xs.size() < 6) {
    DecayFit fit;
    if (!ys.empty()) fit.kappa_inf = ys.back();
    fit.relative_residual = std::numeric_limits<double>::infinity();
    return fit;
  }
  return richardson_limit(xs, ys, 3);
}

std::optional<double> first_tail_violation(const RadialProfile& profile, double tol) {
  const auto& r = profile.grid();
  const auto& w = profile.omega();
  const int N = profile.dimension();
  double v_prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] < 1.0) continue;
    if (!(w[k] > 0.0)) return r[k];
    const double v = 1.0 / (std::pow(r[k], N - 2.0) * w[k]);
    if (std::isfinite(v_prev) && v > v_prev * (1.0 + tol)) return r[k];
    v_prev = v;
  }
  return std::nullopt;
}

DecayFit decay_constant(const RadialProfile& profile) {
  if (const auto bad = first_tail_violation(profile)) {
    std::ostringstream os;
    os << "r^{N-2} omega decreases on the tail near r = " << *bad;
    throw InvariantViolation(os.str());
  }
  return fit_decay_constant(profile.grid(), profile.omega(), profile.dimension());
}

// ---------------------------------------------------------------------------
// integrals of the profile

namespace {

QuadratureOptions profile_quadrature(const RadialProfile& p) {
  QuadratureOptions o;
  o.scale = p.scale();
  o.rel_tol = 1e-12;
  o.breakpoints = {p.scale(), p.r_end()};
  for (double r = 10.0 * p.scale(); r < p.r_end(); r *= 10.0) o.breakpoints.push_back(r);
  return o;
}

}  // namespace

double energy_c0(const RadialProfile& profile, const Nonlinearity& nl) {
  const int N = profile.dimension();
  auto g = [&](double r) {
    const double w = profile.value(r), wp = profile.derivative(r);
    return 0.5 * wp * wp - nl.F(w);
  };
  const IntegralEstimate e = radial_integral(g, N, 2.0 - 2.0 * N, profile_quadrature(profile));
  if (!(e.value > 0.0)) {
    std::ostringstream os;
    os << "ground state energy is not positive (" << e.value << ")";
    throw InvariantViolation(os.str());
  }
  return e.value;
}

Residuals pohozaev_nehari_residuals(const RadialProfile& profile, const Nonlinearity& nl) {
  const int N = profile.dimension();
  const QuadratureOptions o = profile_quadrature(profile);
  const double decay = -(N - 2.0) * nl.small_amplitude_exponent();
  Residuals res;
  res.norm_sq = radial_integral([&](double r) { const double d = profile.derivative(r); return d * d; }, N,
                                2.0 - 2.0 * N, o)
                    .value;
  res.f_omega_omega =
      radial_integral([&](double r) { const double w = profile.value(r); return nl.f(w) * w; }, N, decay, o)
          .value;
  res.F_omega = radial_integral([&](double r) { return nl.F(profile.value(r)); }, N, decay, o).value;
  if (!(res.norm_sq > 0.0)) throw DomainError("residuals need a nontrivial profile");
  res.nehari = std::abs(res.norm_sq - res.f_omega_omega) / res.norm_sq;
  res.pohozaev = std::abs(0.5 * (N - 2.0) * res.norm_sq - N * res.F_omega) / res.norm_sq;
  return res;
}

// ---------------------------------------------------------------------------
// shooting

namespace {

struct GridShot {
  std::vector<double> omega, rw;  // ω and rω' on the grid
  std::size_t valid = 0;          // number of leading grid points before a zero
};

GridShot shoot_on_grid(const Nonlinearity& nl, double a, const std::vector<double>& grid, double rtol) {
  GridShot out;
  out.omega.assign(grid.size(), 0.0);
  out.rw.assign(grid.size(), 0.0);
  out.omega[0] = a;
  const double ell = shot_scale(nl, a);
  const double r0 = std::min(kSeriesStart * ell, 0.5 * grid[1]);
  LogRadialStepper st(nl, rtol);
  start_series(nl, a, r0, st);
  out.valid = 1;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double tk = std::log(grid[k]);
    while (st.t() < tk) {
      st.step(tk);
      if (st.y1() <= 0.0) return out;
    }
    out.omega[k] = st.y1();
    out.rw[k] = st.y2();
    out.valid = k + 1;
  }
  return out;
}

}  // namespace

ShootReport shoot_ground_state(const Nonlinearity& nl, const ShootOptions& opt) {
  if (nl.kind() == NonlinearityKind::Zero) throw DomainError("no ground state for f = 0");
  if (!(opt.tol_a > 0.0) || !(opt.rtol > 0.0)) throw DomainError("tolerances must be positive");
  if (opt.points_per_decade < 4 || opt.core_points < 4) throw DomainError("grid too coarse");
  const int N = nl.dimension();

  double lo = opt.a_lo, hi = opt.a_hi;
  ShotKind c_lo, c_hi;
  if (lo == 0.0 && hi == 0.0) {
    const ShotKind c1 = classify_amplitude(nl, 1.0, opt.rtol);
    bool found = false;
    double prev = 1.0;
    ShotKind c_prev = c1;
    for (int k = 1; k <= 40 && !found; ++k) {
      const double a = std::ldexp(1.0, k);
      const ShotKind c = classify_amplitude(nl, a, opt.rtol);
      if (c != ShotKind::Undecided && c_prev != ShotKind::Undecided && c != c_prev) {
        lo = prev;
        hi = a;
        c_lo = c_prev;
        c_hi = c;
        found = true;
      }
      prev = a;
      c_prev = c;
    }
    prev = 1.0;
    c_prev = c1;
    for (int k = 1; k <= 40 && !found; ++k) {
      const double a = std::ldexp(1.0, -k);
      const ShotKind c = classify_amplitude(nl, a, opt.rtol);
      if (c != ShotKind::Undecided && c_prev != ShotKind::Undecided && c != c_prev) {
        lo = a;
        hi = prev;
        c_lo = c;
        c_hi = c_prev;
        found = true;
      }
      prev = a;
      c_prev = c;
    }
    if (!found) throw BracketError("no amplitude in [2^-40, 2^40] changes class");
  } else {
    if (!(lo > 0.0 && hi > lo)) throw DomainError("bracket must satisfy 0 < a_lo < a_hi");
    c_lo = classify_amplitude(nl, lo, opt.rtol);
    c_hi = classify_amplitude(nl, hi, opt.rtol);
    if (c_lo == c_hi || c_lo == ShotKind::Undecided || c_hi == ShotKind::Undecided) {
      throw BracketError(std::string("bracket endpoints classify as ") + to_string(c_lo) + " and " +
                         to_string(c_hi));
    }
  }

  const bool crossing_above = c_hi == ShotKind::Crossing;
  int iters = 0;
  for (; iters < opt.max_bisections; ++iters) {
    if (hi - lo <= opt.tol_a * hi) break;
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const ShotKind c = classify_amplitude(nl, mid, opt.rtol);
    if (c == ShotKind::Undecided) {
      std::ostringstream os;
      os << "amplitude " << mid << " stays undecided";
      throw ShootingFailure(os.str());
    }
    if ((c == ShotKind::Crossing) == crossing_above) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (hi - lo > opt.tol_a * hi && iters >= opt.max_bisections) {
    throw ShootingFailure("bisection did not reach the requested width");
  }

  // final grid: uniform core, then geometric
  const double a_star = 0.5 * (lo + hi);
  const double ell = shot_scale(nl, a_star);
  const auto K0 = static_cast<std::size_t>(opt.core_points);
  const double h0 = ell / static_cast<double>(K0);
  const double rs = h0 * static_cast<double>(K0);
  const double ratio = std::pow(10.0, 1.0 / opt.points_per_decade);
  const double lr = std::log(ratio);
  const double r_top = std::max(opt.r_max, 100.0 * ell);
  std::vector<double> grid;
  for (std::size_t k = 0; k <= K0; ++k) grid.push_back(h0 * static_cast<double>(k));
  for (std::size_t j = 1;; ++j) {
    const double r = rs * std::exp(lr * static_cast<double>(j));
    if (r > r_top * (1.0 + 1e-12)) break;
    grid.push_back(r);
  }

  const GridShot s_mid = shoot_on_grid(nl, a_star, grid, opt.rtol);
  const GridShot s_lo = shoot_on_grid(nl, lo, grid, opt.rtol);
  const GridShot s_hi = shoot_on_grid(nl, hi, grid, opt.rtol);
  std::size_t end = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (k >= s_mid.valid || k >= s_lo.valid || k >= s_hi.valid) break;
    if (std::abs(s_lo.omega[k] - s_hi.omega[k]) > opt.tail_agreement * s_mid.omega[k]) break;
    if (!(s_mid.omega[k] < s_mid.omega[k - 1])) break;
    end = k;
  }
  if (grid[end] < 10.0 * rs) {
    throw ShootingFailure("bracket too wide to resolve a decade of the tail");
  }
  const std::size_t M = end + 1;
  std::vector<double> r(grid.begin(), grid.begin() + M), w(M), wp(M), wpp(M);
  for (std::size_t k = 0; k < M; ++k) {
    w[k] = s_mid.omega[k];
    if (k == 0) {
      wp[k] = 0.0;
      wpp[k] = -nl.f(a_star) / N;
    } else {
      wp[k] = s_mid.rw[k] / r[k];
      wpp[k] = -(N - 1.0) / r[k] * wp[k] - nl.f(w[k]);
    }
  }
  RadialProfile prof = RadialProfile::from_solution(nl.params(), std::move(r), std::move(w), std::move(wp),
                                                    std::move(wpp), a_star, GridLayout{K0, h0, ratio});
  const double c0 = energy_c0(prof, nl);
  ShootReport rep{prof.with_energy(c0), lo, hi, crossing_above, iters, {}};
  const auto& g = rep.profile.grid();
  rep.classification.tail_slope = fit_log_slope(g, rep.profile.omega(), 0.1 * g.back(), g.back());
  rep.classification.kind = classify_slope(nl, rep.classification.tail_slope);
  return rep;
}

}  // namespace nodal
