#include "nodal/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"

namespace nodal {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kPi = std::numbers::pi;

// Adaptive G7-K15 on [a, b]. Evaluations are counted by the caller's integrand.
template <class F>
double gk(const F& f, double a, double b, double rel_tol, double* err) {
  double e = 0.0;
  const double v = gauss_kronrod<double, 15>::integrate(f, a, b, 12, rel_tol, &e);
  if (err) *err += std::abs(e);
  if (!std::isfinite(v)) throw IntegrationFailure("non-finite panel integral");
  return v;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Tail ∫_b^∞ of J(r) ~ C r^k (k < -1) from the end value, with an error
// estimate comparing against the last doubling panel [b/2, b].
struct Tail {
  double value = 0.0;
  double error = 0.0;
};

Tail power_tail(double J_b, double b, double k, double last_panel) {
  Tail t;
  if (k <= -1e6 || J_b == 0.0) return t;
  t.value = J_b * b / (-(k + 1.0));
  const double g = std::pow(2.0, k + 1.0);
  const double alt = last_panel * g / (1.0 - g);
  t.error = std::abs(t.value - alt);
  if (!std::isfinite(t.value)) t.value = 0.0;
  if (!std::isfinite(t.error)) t.error = std::abs(t.value);
  return t;
}

// ∫₀^{limit} J(r) dr over panels 0, scale, 2 scale, ... (plus the given
// breakpoints), stopping once a doubling panel is negligible, then adding the
// power-law tail with J ~ r^k. limit may be +∞.
struct PanelResult {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
PanelResult integrate_to_infinity(const F& J, double scale, double k, double rel_tol,
                                  std::vector<double> breaks, double limit, double start = 0.0) {
  PanelResult out;
  breaks.push_back(start + scale);
  std::sort(breaks.begin(), breaks.end());
  double a = start;
  std::size_t bi = 0;
  int quiet = 0;
  double last = 0.0;
  const double cap = std::max(scale, start) * 1e15;
  while (a < limit) {
    double b;
    while (bi < breaks.size() && breaks[bi] <= a * (1.0 + 1e-15)) ++bi;
    if (bi < breaks.size()) {
      b = breaks[bi];
    } else {
      b = std::max(2.0 * a, a + scale);
    }
    b = std::min(b, limit);
    const double v = gk(J, a, b, rel_tol, &out.error);
    out.value += v;
    last = v;
    a = b;
    if (bi >= breaks.size()) {
      quiet = std::abs(v) <= 0.1 * rel_tol * std::abs(out.value) ? quiet + 1 : 0;
      if (quiet >= 2 || a > cap) break;
    }
  }
  if (a < limit) {
    Tail t = power_tail(J(a), a, k, last);
    if (std::isfinite(limit)) {
      // truncate the power tail at the finite limit
      const double frac = 1.0 - std::pow(limit / a, k + 1.0);
      t.value *= frac;
      t.error *= frac;
    }
    out.value += t.value;
    out.error += t.error;
  }
  return out;
}

}  // namespace

const char* to_string(IntegralMethod method) {
  switch (method) {
    case IntegralMethod::Radial1D: return "Radial1D";
    case IntegralMethod::Reduced2D: return "Reduced2D";
    case IntegralMethod::Reduced3D: return "Reduced3D";
    case IntegralMethod::MonteCarlo: return "MonteCarlo";
  }
  return "?";
}

IntegralEstimate operator+(const IntegralEstimate& a, const IntegralEstimate& b) {
  IntegralEstimate r;
  r.value = a.value + b.value;
  r.abs_error = a.abs_error + b.abs_error;
  r.method = a.method == b.method ? a.method : std::max(a.method, b.method);
  r.n_evals = a.n_evals + b.n_evals;
  return r;
}

IntegralEstimate operator*(double c, const IntegralEstimate& a) {
  IntegralEstimate r = a;
  r.value *= c;
  r.abs_error *= std::abs(c);
  return r;
}

double sphere_area(int N) {
  if (N < 1) throw DomainError("sphere_area needs N >= 1");
  return 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
}

// ---------------------------------------------------------------------------

IntegralEstimate radial_integral(const RadialFn& g, int N, double tail_exponent,
                                 const QuadratureOptions& opts) {
  if (N < 1) throw DomainError("radial_integral needs N >= 1");
  if (!(tail_exponent < -N)) {
    throw DomainError("radial integral diverges: tail exponent must be below -N");
  }
  std::size_t evals = 0;
  auto J = [&](double r) {
    ++evals;
    return g(r) * ipow(r, N - 1);
  };
  std::vector<double> breaks;
  for (double b : opts.breakpoints) {
    if (b > 0.0 && std::isfinite(b)) breaks.push_back(b);
  }
  const PanelResult pr = integrate_to_infinity(J, opts.scale, tail_exponent + N - 1.0, opts.rel_tol,
                                               breaks, std::numeric_limits<double>::infinity());
  const double area = sphere_area(N);
  return {area * pr.value, area * pr.error, IntegralMethod::Radial1D, evals};
}

// ---------------------------------------------------------------------------
// two centres

namespace {

// ∫ over the Voronoi cell of centre i (at the origin) of gi(|x|) gj(|x - y|),
// divided by |S^{N-2}|.
PanelResult two_center_cell(const RadialTerm& gi, const RadialTerm& gj, double s, int N,
                            const QuadratureOptions& opts, std::size_t& evals) {
  const double inner_tol = 0.1 * opts.rel_tol;
  auto inner = [&](double r) {
    const double c = s / (2.0 * r);
    const double theta_min = c >= 1.0 ? 0.0 : std::acos(c);
    auto integrand = [&](double th) {
      ++evals;
      const double d2 = r * r + s * s - 2.0 * r * s * std::cos(th);
      return gj.g(std::sqrt(std::max(d2, 0.0))) * ipow(std::sin(th), N - 2);
    };
    return gk(integrand, theta_min, kPi, inner_tol, nullptr);
  };
  auto outer = [&](double r) {
    if (r == 0.0) return 0.0;
    const double gv = gi.g(r);
    if (gv == 0.0) return 0.0;
    return ipow(r, N - 1) * gv * inner(r);
  };

  PanelResult out;
  const double ell = opts.scale;
  // [0, s/2]: whole sphere about centre i
  {
    double a = 0.0;
    double b = std::min(ell, 0.5 * s);
    while (a < 0.5 * s) {
      out.value += gk(outer, a, b, opts.rel_tol, &out.error);
      a = b;
      b = std::min(2.0 * b, 0.5 * s);
    }
  }
  // [s/2, s] with r = s/2 + (s/2)v² to absorb the square-root edge of θ_min
  {
    auto sub = [&](double v) { return outer(0.5 * s * (1.0 + v * v)) * s * v; };
    out.value += gk(sub, 0.0, 1.0, opts.rel_tol, &out.error);
  }
  // [s, ∞)
  const PanelResult far =
      integrate_to_infinity(outer, std::max(s, ell), gi.tail_exponent + gj.tail_exponent + N - 1.0,
                            opts.rel_tol, {}, std::numeric_limits<double>::infinity(), s);
  out.value += far.value;
  out.error += far.error;
  return out;
}

}  // namespace

IntegralEstimate two_center_integral(const RadialTerm& gA, const RadialTerm& gB, double separation,
                                     int N, const QuadratureOptions& opts) {
  if (N < 3) throw DomainError("two_center_integral needs N >= 3");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw DomainError("separation must be finite and >= 0");
  }
  const double e = gA.tail_exponent + gB.tail_exponent;
  if (!(e < -N)) throw DomainError("two-centre integral diverges: combined tail exponent >= -N");
  if (separation == 0.0) {
    RadialFn prod = [&](double r) { return gA.g(r) * gB.g(r); };
    IntegralEstimate r = radial_integral(prod, N, e, opts);
    return r;
  }
  std::size_t evals = 0;
  const PanelResult a = two_center_cell(gA, gB, separation, N, opts, evals);
  const PanelResult b = two_center_cell(gB, gA, separation, N, opts, evals);
  const double area = sphere_area(N - 1);
  return {area * (a.value + b.value), area * (a.error + b.error), IntegralMethod::Reduced2D, evals};
}

// ---------------------------------------------------------------------------
// three centres

namespace {

double norm(const Point& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Point sub(const Point& a, const Point& b) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Vec2 {
  double x, y;
};

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

PanelResult three_center_cell(const std::array<RadialTerm, 3>& g, const std::array<Vec2, 3>& P,
                              int i, int N, const QuadratureOptions& opts, std::size_t& evals) {
  int others[2];
  for (int k = 0, n = 0; k < 3; ++k) {
    if (k != i) others[n++] = k;
  }
  Vec2 D[2];
  double d2[2];
  for (int n = 0; n < 2; ++n) {
    D[n] = {P[others[n]].x - P[i].x, P[others[n]].y - P[i].y};
    d2[n] = D[n].x * D[n].x + D[n].y * D[n].y;
  }
  const double e_total = g[0].tail_exponent + g[1].tail_exponent + g[2].tail_exponent;
  const double ell = opts.scale;
  const double tol_phi = opts.rel_tol;
  const double tol_psi = 0.1 * opts.rel_tol;
  const double tol_rho = 0.01 * opts.rel_tol;

  auto rho_plane = [&](double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n < 2; ++n) {
      const double ed = c * D[n].x + s * D[n].y;
      if (ed > 0.0) best = std::min(best, d2[n] / (2.0 * ed));
    }
    return best;
  };

  auto psi_integrand = [&](double phi, double rp, double psi) {
    const double cp = std::cos(psi), sp = std::sin(psi);
    const double c = std::cos(phi), s = std::sin(phi);
    const double ed0 = cp * (c * D[0].x + s * D[0].y);
    const double ed1 = cp * (c * D[1].x + s * D[1].y);
    auto J = [&](double rho) {
      ++evals;
      const double gi = g[i].g(rho);
      if (gi == 0.0) return 0.0;
      const double r0 = std::sqrt(std::max(rho * rho + d2[0] - 2.0 * rho * ed0, 0.0));
      const double r1 = std::sqrt(std::max(rho * rho + d2[1] - 2.0 * rho * ed1, 0.0));
      return gi * g[others[0]].g(r0) * g[others[1]].g(r1) * ipow(rho, N - 1);
    };
    const double rho_max = (std::isfinite(rp) && cp > 0.0) ? rp / cp : std::numeric_limits<double>::infinity();
    const PanelResult pr = integrate_to_infinity(J, ell, e_total + N - 1.0, tol_rho, {}, rho_max);
    return pr.value * cp * ipow(sp, N - 3);
  };

  auto phi_integrand = [&](double phi) {
    const double rp = rho_plane(phi);
    auto f = [&](double psi) { return psi_integrand(phi, rp, psi); };
    return gk(f, 0.0, 0.5 * kPi, tol_psi, nullptr);
  };

  std::vector<double> cuts = {0.0, 2.0 * kPi};
  auto add_perp = [&](double x, double y) {
    if (x == 0.0 && y == 0.0) return;
    const double a = std::atan2(y, x);
    cuts.push_back(wrap_angle(a + 0.5 * kPi));
    cuts.push_back(wrap_angle(a - 0.5 * kPi));
  };
  add_perp(D[0].x, D[0].y);
  add_perp(D[1].x, D[1].y);
  add_perp(d2[1] * D[0].x - d2[0] * D[1].x, d2[1] * D[0].y - d2[0] * D[1].y);
  std::sort(cuts.begin(), cuts.end());

  PanelResult out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] - cuts[k] < 1e-13) continue;
    out.value += gk(phi_integrand, cuts[k], cuts[k + 1], tol_phi, &out.error);
  }
  return out;
}

RadialTerm product(const RadialTerm& a, const RadialTerm& b) {
  return {[ga = a.g, gb = b.g](double r) { return ga(r) * gb(r); }, a.tail_exponent + b.tail_exponent};
}

}  // namespace

IntegralEstimate three_center_integral(const std::array<RadialTerm, 3>& g,
                                       const std::array<Point, 3>& centers, int N,
                                       const QuadratureOptions& opts) {
  if (N < 4) throw DomainError("three_center_integral needs N >= 4");
  for (const auto& c : centers) {
    if (static_cast<int>(c.size()) != N) throw DomainError("centre dimension differs from N");
  }
  const double e = g[0].tail_exponent + g[1].tail_exponent + g[2].tail_exponent;
  if (!(e < -N)) throw DomainError("three-centre integral diverges: combined tail exponent >= -N");

  double extent = 1.0;
  for (const auto& c : centers) extent = std::max(extent, norm(c));
  const double eps = 1e-12 * extent;
  const double d01 = norm(sub(centers[0], centers[1]));
  const double d02 = norm(sub(centers[0], centers[2]));
  const double d12 = norm(sub(centers[1], centers[2]));
  const bool c01 = d01 <= eps, c02 = d02 <= eps, c12 = d12 <= eps;
  if ((c01 && c02) || (c01 && c12) || (c02 && c12)) {
    const RadialTerm all = product(product(g[0], g[1]), g[2]);
    return radial_integral(all.g, N, e, opts);
  }
  if (c01) return two_center_integral(product(g[0], g[1]), g[2], d02, N, opts);
  if (c02) return two_center_integral(product(g[0], g[2]), g[1], d01, N, opts);
  if (c12) return two_center_integral(product(g[1], g[2]), g[0], d01, N, opts);

  // orthonormal basis of a plane containing the centres
  const Point u = sub(centers[1], centers[0]);
  Point e1 = u;
  for (double& x : e1) x /= d01;
  Point w = sub(centers[2], centers[0]);
  double proj = dot(w, e1);
  Point e2 = w;
  for (std::size_t k = 0; k < e2.size(); ++k) e2[k] -= proj * e1[k];
  double ne2 = norm(e2);
  if (ne2 <= 1e-12 * std::max(1.0, norm(w))) {
    for (int axis = 0; axis < N; ++axis) {
      Point t(N, 0.0);
      t[axis] = 1.0;
      const double pe = dot(t, e1);
      for (int k = 0; k < N; ++k) t[k] -= pe * e1[k];
      if (norm(t) > 0.5) {
        e2 = t;
        break;
      }
    }
    ne2 = norm(e2);
  }
  for (double& x : e2) x /= ne2;
  std::array<Vec2, 3> P{};
  for (int k = 0; k < 3; ++k) {
    const Point v = sub(centers[k], centers[0]);
    P[k] = {dot(v, e1), dot(v, e2)};
  }

  std::size_t evals = 0;
  PanelResult total;
  for (int i = 0; i < 3; ++i) {
    const PanelResult c = three_center_cell(g, P, i, N, opts, evals);
    total.value += c.value;
    total.error += c.error;
  }
  const double area = sphere_area(N - 2);
  return {area * total.value, area * total.error, IntegralMethod::Reduced3D, evals};
}

// ---------------------------------------------------------------------------
// Monte Carlo

double mc_proposal_exponent(double decay_exponent, int N) {
  return std::clamp(decay_exponent, N + 0.5, N + 2.0);
}

namespace {

struct Proposal {
  int N;
  double s;
  double ell;
  double log_norm;  // log of the per-component normalisation Z
  const std::vector<Point>* centers;

  Proposal(const std::vector<Point>& c, double decay, double scale)
      : N(static_cast<int>(c.front().size())), ell(scale), centers(&c) {
    s = mc_proposal_exponent(decay, N);
    log_norm = std::log(sphere_area(N)) + N * std::log(ell) + std::lgamma(N) + std::lgamma(s - N) -
               std::lgamma(s);
  }

  double log_density(std::span<const double> x) const {
    const std::size_t K = centers->size();
    double m = -std::numeric_limits<double>::infinity();
    // terms are small in number; two passes keep logsumexp exact
    double buf[64];
    std::vector<double> big;
    double* lt = buf;
    if (K > 64) {
      big.resize(K);
      lt = big.data();
    }
    for (std::size_t k = 0; k < K; ++k) {
      const Point& c = (*centers)[k];
      double d2 = 0.0;
      for (int j = 0; j < N; ++j) {
        const double t = x[j] - c[j];
        d2 += t * t;
      }
      lt[k] = -s * std::log1p(std::sqrt(d2) / ell);
      m = std::max(m, lt[k]);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += std::exp(lt[k] - m);
    return m + std::log(acc) - std::log(static_cast<double>(K)) - log_norm;
  }
};

struct BlockStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

void merge(BlockStats& a, const BlockStats& b) {
  if (b.n == 0) return;
  if (a.n == 0) {
    a = b;
    return;
  }
  const double n = static_cast<double>(a.n + b.n);
  const double delta = b.mean - a.mean;
  a.mean += delta * static_cast<double>(b.n) / n;
  a.m2 += b.m2 + delta * delta * static_cast<double>(a.n) * static_cast<double>(b.n) / n;
  a.n += b.n;
}

template <class Layout>
IntegralEstimate reduce_blocks(const std::vector<BlockStats>& stats, const Layout& L) {
  double value = 0.0, var = 0.0;
  const double w = 1.0 / static_cast<double>(L.strata);
  for (std::size_t s = 0; s < L.strata; ++s) {
    BlockStats acc;
    for (std::size_t b = 0; b < L.blocks_per; ++b) merge(acc, stats[s * L.blocks_per + b]);
    value += w * acc.mean;
    if (acc.n > 1) var += w * w * acc.m2 / static_cast<double>(acc.n - 1) / static_cast<double>(acc.n);
  }
  if (!std::isfinite(value)) throw IntegrationFailure("Monte Carlo estimate is not finite");
  return {value, std::sqrt(var), IntegralMethod::MonteCarlo, L.strata * L.per_stratum};
}

}  // namespace

double mc_proposal_density(std::span<const double> x, const std::vector<Point>& centers,
                           double decay_exponent, double scale) {
  if (centers.empty()) throw DomainError("proposal needs at least one centre");
  return std::exp(Proposal(centers, decay_exponent, scale).log_density(x));
}

namespace {

struct Layout {
  std::size_t strata, per_stratum, block, blocks_per;
  std::size_t tasks() const { return strata * blocks_per; }
  std::size_t count(std::size_t task) const {
    return std::min(block, per_stratum - (task % blocks_per) * block);
  }
  std::size_t first(std::size_t task) const {
    return (task / blocks_per) * per_stratum + (task % blocks_per) * block;
  }
};

Layout check_and_layout(const std::vector<Point>& centers, const McOptions& opts) {
  if (centers.empty()) throw DomainError("Monte Carlo needs at least one centre");
  if (opts.n_samples < 10000) throw DomainError("Monte Carlo needs n_samples >= 1e4");
  if (!(opts.scale > 0.0)) throw DomainError("proposal scale must be positive");
  const std::size_t N = centers.front().size();
  for (const auto& c : centers) {
    if (c.size() != N) throw DomainError("centres of differing dimension");
  }
  Layout l;
  l.strata = std::max<std::size_t>(centers.size(), 2);
  l.per_stratum = mc_sample_count(centers.size(), opts) / l.strata;
  l.block = std::max<std::size_t>(opts.block_size, 2);
  l.blocks_per = (l.per_stratum + l.block - 1) / l.block;
  return l;
}

// visit(index, x, 1/q(x)) returns the weighted sample value
template <class Visit>
IntegralEstimate run_mc(const std::vector<Point>& centers, double decay_exponent, const McOptions& opts,
                        const Visit& visit) {
  const Layout L = check_and_layout(centers, opts);
  const int N = static_cast<int>(centers.front().size());
  const Proposal prop(centers, decay_exponent, opts.scale);
  const std::size_t K = centers.size();
  std::vector<BlockStats> stats(L.tasks());

  parallel_for(L.tasks(), [&](std::size_t task) {
    const std::size_t stratum = task / L.blocks_per;
    const std::size_t n = L.count(task);
    const std::size_t base = L.first(task);
    const Point& c = centers[stratum % K];
    std::mt19937_64 rng(derive_seed(opts.seed, stratum, task % L.blocks_per));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> gamma_n(static_cast<double>(N), 1.0);
    std::gamma_distribution<double> gamma_t(prop.s - N, 1.0);
    std::vector<double> x(N);
    BlockStats st;
    for (std::size_t k = 0; k < n; ++k) {
      double len2 = 0.0;
      for (int j = 0; j < N; ++j) {
        x[j] = normal(rng);
        len2 += x[j] * x[j];
      }
      const double r = opts.scale * gamma_n(rng) / gamma_t(rng);
      const double f = r / std::sqrt(len2);
      for (int j = 0; j < N; ++j) x[j] = c[j] + f * x[j];
      const double lp = prop.log_density(x);
      if (!std::isfinite(lp)) throw InvariantViolation("proposal density vanished at a sample");
      const double v = visit(base + k, std::span<const double>(x), std::exp(-lp));
      ++st.n;
      const double delta = v - st.mean;
      st.mean += delta / static_cast<double>(st.n);
      st.m2 += delta * (v - st.mean);
    }
    stats[task] = st;
  });
  return reduce_blocks(stats, L);
}

}  // namespace

IntegralEstimate mc_full_integral(const FieldFn& h, const std::vector<Point>& centers,
                                  double decay_exponent, const McOptions& opts) {
  return run_mc(centers, decay_exponent, opts,
                [&](std::size_t, std::span<const double> x, double w) { return h(x) * w; });
}

std::size_t mc_sample_count(std::size_t n_centers, const McOptions& opts) {
  const std::size_t strata = std::max<std::size_t>(n_centers, 2);
  return strata * ((opts.n_samples + strata - 1) / strata);
}

McSampleSet mc_draw(const std::vector<Point>& centers, double decay_exponent, const McOptions& opts,
                    const std::function<void(std::size_t, std::span<const double>)>& record) {
  McSampleSet set;
  const Layout L = check_and_layout(centers, opts);
  set.strata = L.strata;
  set.per_stratum = L.per_stratum;
  set.block_size = L.block;
  set.weights.assign(L.strata * L.per_stratum, 0.0);
  run_mc(centers, decay_exponent, opts, [&](std::size_t i, std::span<const double> x, double w) {
    set.weights[i] = w;
    record(i, x);
    return 0.0;
  });
  return set;
}

IntegralEstimate mc_reduce(const McSampleSet& set, const std::function<double(std::size_t)>& value) {
  Layout L{set.strata, set.per_stratum, set.block_size, (set.per_stratum + set.block_size - 1) / set.block_size};
  std::vector<BlockStats> stats(L.tasks());
  parallel_for(L.tasks(), [&](std::size_t task) {
    const std::size_t n = L.count(task);
    const std::size_t base = L.first(task);
    BlockStats st;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = value(base + k) * set.weights[base + k];
      ++st.n;
      const double delta = v - st.mean;
      st.mean += delta / static_cast<double>(st.n);
      st.m2 += delta * (v - st.mean);
    }
    stats[task] = st;
  });
  return reduce_blocks(stats, L);
}

}  // namespace nodal
