#include "nodal/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "nodal/errors.hpp"
#include "hermite.hpp"

namespace nodal {

namespace {

void require_finite(double s) {
  if (!std::isfinite(s)) throw DomainError("nonlinearity evaluated at a non-finite argument");
}

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

void ModelParams::validate() const {
  std::ostringstream why;
  if (N < 5) {
    why << "dimension N=" << N << " must be >= 5";
  } else if (!(p > 2.0)) {
    why << "exponent p=" << p << " must exceed 2";
  } else if (!(p < critical_exponent())) {
    why << "exponent p=" << p << " must be below 2N/(N-2)=" << critical_exponent();
  } else if (!(q > critical_exponent())) {
    why << "exponent q=" << q << " must exceed 2N/(N-2)=" << critical_exponent();
  } else if (!(alpha > N / (2.0 * (N - 2)) && alpha <= 1.0)) {
    why << "alpha=" << alpha << " must lie in (N/(2(N-2)), 1]";
  } else if (!(theta > 2.0)) {
    why << "theta=" << theta << " must exceed 2";
  } else {
    return;
  }
  throw DomainError(why.str());
}

ModelParams make_params(int N, double p, double q) {
  ModelParams params{N, p, q, 1.0, p};
  params.validate();
  return params;
}

// ---------------------------------------------------------------------------
// AntiderivativeTable

AntiderivativeTable::AntiderivativeTable(const ModelParams& params)
    : p_(params.p), q_(params.q), delta_(params.q - params.p) {
  s_min_ = 1e-4;
  s_max_ = std::clamp(std::pow(10.0, 1.0 / delta_), 16.0, 1e8);
  h_ = 1.0 / 128.0;
  u0_ = std::log(s_min_);
  const auto n_intervals = static_cast<std::size_t>(std::ceil((std::log(s_max_) - u0_) / h_));
  s_max_ = std::exp(u0_ + h_ * static_cast<double>(n_intervals));

  F_.resize(n_intervals + 1);
  dF_.resize(n_intervals + 1);
  d2F_.resize(n_intervals + 1);

  // Neumaier-compensated running sum of panel integrals of f(e^u) e^u du.
  double sum = small_series(s_min_), comp = 0.0;
  for (std::size_t k = 0; k <= n_intervals; ++k) {
    const double u = u0_ + h_ * static_cast<double>(k);
    const double s = std::exp(u);
    F_[k] = sum + comp;
    dF_[k] = f(s) * s;
    d2F_[k] = s * (fprime(s) * s + f(s));
    if (k == n_intervals) break;
    double panel = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double ui = u + 0.5 * h_ * (1.0 + kGlNodes[i]);
      const double si = std::exp(ui);
      panel += kGlWeights[i] * f(si) * si;
    }
    panel *= 0.5 * h_;
    const double t = sum + panel;
    comp += std::abs(sum) >= std::abs(panel) ? (sum - t) + panel : (panel - t) + sum;
    sum = t;
  }
}

double AntiderivativeTable::f(double s) const {
  return std::pow(s, q_ - 1.0) / (1.0 + std::pow(s, delta_));
}

double AntiderivativeTable::fprime(double s) const {
  const double sd = std::pow(s, delta_);
  const double den = 1.0 + sd;
  return std::pow(s, q_ - 2.0) * ((q_ - 1.0) + (p_ - 1.0) * sd) / (den * den);
}

// Σ_k (-1)^k s^{q+kδ}/(q+kδ), valid for s < 1.
double AntiderivativeTable::small_series(double s) const {
  const double ratio = std::pow(s, delta_);
  double power = std::pow(s, q_);
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double term = power / (q_ + k * delta_);
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-17 * std::abs(sum)) break;
    power *= ratio;
  }
  return sum;
}

double AntiderivativeTable::large_series(double s) const {
  // ∫_{s_max}^{s} Σ_k (-1)^k t^{p-1-kδ} dt
  double sum = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double e = p_ - k * delta_;
    double term;
    if (std::abs(e) < 1e-12) {
      term = std::log(s / s_max_);
    } else {
      term = (std::pow(s, e) - std::pow(s_max_, e)) / e;
    }
    sum += (k % 2 == 0) ? term : -term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return F_.back() + sum;
}

double AntiderivativeTable::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  if (s < s_min_) return small_series(s);
  if (s >= s_max_) return large_series(s);
  const double x = (std::log(s) - u0_) / h_;
  auto k = static_cast<std::size_t>(x);
  if (k >= F_.size() - 1) k = F_.size() - 2;
  const double t = x - static_cast<double>(k);
  const detail::HermiteNode a{F_[k], dF_[k], d2F_[k]};
  const detail::HermiteNode b{F_[k + 1], dF_[k + 1], d2F_[k + 1]};
  return detail::quintic_value(a, b, h_, t);
}

// ---------------------------------------------------------------------------
// Nonlinearity

Nonlinearity Nonlinearity::family(const ModelParams& params) {
  params.validate();
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::Family;
  nl.N_ = params.N;
  nl.params_ = params;
  nl.table_ = std::make_shared<const AntiderivativeTable>(params);
  return nl;
}

Nonlinearity Nonlinearity::pure_power(int N, double exponent) {
  if (!(exponent > 1.0) || N < 1) throw DomainError("pure power needs exponent > 1 and N >= 1");
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::PurePower;
  nl.N_ = N;
  nl.params_ = ModelParams{N, exponent, exponent, 1.0, exponent};
  return nl;
}

Nonlinearity Nonlinearity::zero(int N) {
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::Zero;
  nl.N_ = N;
  nl.params_ = ModelParams{N, 2.0, 2.0, 1.0, 2.0};
  return nl;
}

double Nonlinearity::f(double s) const {
  require_finite(s);
  const double a = std::abs(s);
  double v = 0.0;
  switch (kind_) {
    case NonlinearityKind::Zero:
      return 0.0;
    case NonlinearityKind::PurePower:
      v = std::pow(a, params_.p - 1.0);
      break;
    case NonlinearityKind::Family:
      if (a == 0.0) return 0.0;
      v = std::pow(a, params_.q - 1.0) / (1.0 + std::pow(a, params_.q - params_.p));
      // s^{q-1}/(1+s^{q-p}) overflows to inf/inf for huge s; use the p-branch form.
      if (!std::isfinite(v)) v = std::pow(a, params_.p - 1.0) / (1.0 + std::pow(a, params_.p - params_.q));
      break;
  }
  return s < 0.0 ? -v : v;
}

double Nonlinearity::fprime(double s) const {
  require_finite(s);
  const double a = std::abs(s);
  switch (kind_) {
    case NonlinearityKind::Zero:
      return 0.0;
    case NonlinearityKind::PurePower:
      return (params_.p - 1.0) * std::pow(a, params_.p - 2.0);
    case NonlinearityKind::Family: {
      if (a == 0.0) return 0.0;
      const double p = params_.p, q = params_.q;
      if (a <= 1.0) {
        const double sd = std::pow(a, q - p);
        const double den = 1.0 + sd;
        return std::pow(a, q - 2.0) * ((q - 1.0) + (p - 1.0) * sd) / (den * den);
      }
      // divide through by s^{2(q-p)} to stay finite for large s
      const double sd = std::pow(a, p - q);
      const double den = 1.0 + sd;
      return std::pow(a, p - 2.0) * ((q - 1.0) * sd + (p - 1.0)) / (den * den);
    }
  }
  return 0.0;
}

double Nonlinearity::F(double s) const {
  require_finite(s);
  const double a = std::abs(s);
  switch (kind_) {
    case NonlinearityKind::Zero:
      return 0.0;
    case NonlinearityKind::PurePower:
      return std::pow(a, params_.p) / params_.p;
    case NonlinearityKind::Family:
      return (*table_)(a);
  }
  return 0.0;
}

double Nonlinearity::small_amplitude_exponent() const { return params_.q; }
double Nonlinearity::large_amplitude_exponent() const { return params_.p; }

// ---------------------------------------------------------------------------
// checks

std::vector<double> log_samples(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw DomainError("log_samples needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

GrowthReport check_growth_bounds(const Nonlinearity& nl, std::span<const double> s_samples) {
  const double p = nl.large_amplitude_exponent();
  const double q = nl.small_amplitude_exponent();
  GrowthReport rep;
  for (double s : s_samples) {
    const double a = std::abs(s);
    if (a == 0.0) continue;
    const double e = a >= 1.0 ? p : q;
    rep.a1_antiderivative = std::max(rep.a1_antiderivative, std::abs(nl.F(s)) / std::pow(a, e));
    rep.a1_value = std::max(rep.a1_value, std::abs(nl.f(s)) / std::pow(a, e - 1.0));
    rep.a1_derivative = std::max(rep.a1_derivative, std::abs(nl.fprime(s)) / std::pow(a, e - 2.0));
    ++rep.n_samples;
  }
  rep.a1 = std::max({rep.a1_antiderivative, rep.a1_value, rep.a1_derivative});
  rep.pass = rep.n_samples > 0 && std::isfinite(rep.a1) && rep.a1 > 0.0;
  return rep;
}

StructureReport check_structure(const Nonlinearity& nl, std::span<const double> s_samples) {
  const double theta = nl.params().theta;
  StructureReport rep;
  rep.min_gap_ar = rep.min_gap_convex = std::numeric_limits<double>::infinity();
  rep.min_rel_gap_ar = rep.min_rel_gap_convex = std::numeric_limits<double>::infinity();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (double s : s_samples) {
    if (!(s > 0.0)) throw DomainError("check_structure needs samples s > 0");
    const double F = nl.F(s);
    const double fs = nl.f(s) * s;
    const double fps2 = nl.fprime(s) * s * s;
    const double gap_ar = fs - theta * F;
    const double gap_cv = fps2 - fs;
    rep.min_gap_ar = std::min(rep.min_gap_ar, gap_ar);
    rep.min_gap_convex = std::min(rep.min_gap_convex, gap_cv);
    rep.min_rel_gap_ar = std::min(rep.min_rel_gap_ar, gap_ar / fs);
    rep.min_rel_gap_convex = std::min(rep.min_rel_gap_convex, gap_cv / fs);
    rep.min_ratio = std::min(rep.min_ratio, fps2 / fs);
    rep.max_ratio = std::max(rep.max_ratio, fps2 / fs);
    // θF <= fs is checked up to the table's rounding (1e-13 relative).
    ok = ok && F >= 0.0 && gap_ar >= -1e-13 * fs && gap_cv > 0.0;
    ++rep.n_samples;
  }
  rep.pass = ok && rep.n_samples > 0;
  return rep;
}

}  // namespace nodal
