#include "nodal/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"

namespace nodal {

namespace {

constexpr double kDenGuard = 1e-14;
constexpr std::size_t kBlock = 4096;
// samples whose numerator is lost to cancellation are excluded: a rounding
// bound of 64 ulps of the summed terms must stay below 1e-6 of the majorant
constexpr double kRounding = 64.0 * std::numeric_limits<double>::epsilon();
constexpr double kCancellation = 1e-6;

double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double critical(const Nonlinearity& nl) {
  const int N = nl.params().N;
  return 2.0 * N / (N - 2.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// interaction scaling

double cm_exponent(const std::vector<double>& thetas, int N) {
  double theta = 0.0, top = -std::numeric_limits<double>::infinity();
  for (double t : thetas) {
    theta += t;
    top = std::max(top, t);
  }
  return std::min(theta - top, theta - N);
}

std::vector<double> default_cm_ladder() { return {128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0}; }

CmResult check_interaction_decay(const CmConfig& config, const std::vector<double>& R_ladder, double rel_tol) {
  const std::size_t n = config.points.size();
  const int N = config.N;
  if (n < 2 || n > 3) throw DomainError("check_interaction_decay handles 2 or 3 points");
  if (config.thetas.size() != n) throw DomainError("one theta per point");
  double theta = 0.0;
  for (double t : config.thetas) {
    if (!(t > 0.0)) throw DomainError("thetas must be positive");
    theta += t;
  }
  if (!(theta > N)) throw DomainError("sum of thetas must exceed N (the integral diverges otherwise)");
  for (const auto& p : config.points) {
    if (static_cast<int>(p.size()) != N) throw DomainError("point dimension differs from N");
  }
  if (R_ladder.size() < 2) throw DomainError("R ladder needs at least two entries");

  CmResult res;
  res.mu = cm_exponent(config.thetas, N);
  res.d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) res.d = std::min(res.d, dist(config.points[i], config.points[j]));
  }
  if (!(res.d > 0.0)) throw DomainError("points must be distinct");

  std::vector<RadialTerm> g;
  for (double t : config.thetas) g.push_back({[t](double r) { return std::pow(1.0 + r, -t); }, -t});
  QuadratureOptions qo;
  qo.rel_tol = rel_tol;
  res.R = R_ladder;
  res.values.resize(R_ladder.size());
  parallel_for(R_ladder.size(), [&](std::size_t k) {
    const double R = R_ladder[k];
    if (n == 2) {
      res.values[k] = two_center_integral(g[0], g[1], R * res.d, N, qo).value;
    } else {
      std::array<Point, 3> c;
      for (std::size_t i = 0; i < 3; ++i) {
        c[i] = config.points[i];
        for (double& v : c[i]) v *= R;
      }
      res.values[k] = three_center_integral({g[0], g[1], g[2]}, c, N, qo).value;
    }
  });

  // slope of log I against log R
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(R_ladder.size());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < R_ladder.size(); ++k) {
    const double lx = std::log(R_ladder[k]), ly = std::log(res.values[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    const double c = res.values[k] * std::pow(R_ladder[k] * res.d, res.mu);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  res.fitted_exponent = (sxy - sx * sy / m) / (sxx - sx * sx / m);
  res.C_fitted = hi;
  res.ratio_spread = hi / lo;
  res.pass = std::isfinite(res.fitted_exponent) && res.fitted_exponent <= -0.95 * res.mu && lo > 0.0 &&
             res.ratio_spread <= 4.0;
  return res;
}

CmConfig random_cm_config(int n, int N, std::uint64_t seed) {
  if (n < 2 || n > 3) throw DomainError("random_cm_config handles 2 or 3 points");
  if (N < 3) throw DomainError("N must be at least 3");
  std::mt19937_64 rng(derive_seed(seed, 0x636d, static_cast<std::uint64_t>(n)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CmConfig c;
  c.N = N;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    c.points.assign(n, Point(N, 0.0));
    for (int i = 1; i < n; ++i) {
      double len = 0.0;
      for (double& v : c.points[i]) {
        v = normal(rng);
        len += v * v;
      }
      const double radius = 0.5 + 1.5 * unit(rng);
      for (double& v : c.points[i]) v *= radius / std::sqrt(len);
    }
    bool spread = true;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) spread = spread && dist(c.points[i], c.points[j]) >= 0.3;
    }
    c.thetas.assign(n, 0.0);
    bool ok = spread;
    for (double& t : c.thetas) {
      t = 1.0 + (2.0 * N - 1.0) * unit(rng);
      ok = ok && std::abs(t - N) >= 0.4;
    }
    if (ok && cm_exponent(c.thetas, N) >= 1.0) return c;
  }
  throw SearchFailure("no admissible random configuration");
}

// ---------------------------------------------------------------------------
// pointwise inequalities

namespace {

std::optional<double> cmp_ratio_opt(const Nonlinearity& nl, double t, double u) {
  if (std::abs(t - 1.0) < 1e-6) return std::nullopt;
  const double den = std::abs(t - 1.0) * std::pow(std::abs(u), critical(nl) - 1.0);
  if (!(den > kDenGuard)) return std::nullopt;
  return std::abs(t * nl.f(u) - nl.f(t * u)) / den;
}

std::optional<double> f_ratio_opt(const Nonlinearity& nl, std::span<const double> u, double beta) {
  double sum = 0.0, fs = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum += u[i];
    fs += nl.f(u[i]);
    for (std::size_t j = i + 1; j < u.size(); ++j) den += std::pow(std::abs(u[i] * u[j]), beta);
  }
  if (!(den > kDenGuard)) return std::nullopt;
  double scale = std::abs(nl.f(sum));
  for (double v : u) scale += std::abs(nl.f(v));
  if (kRounding * scale > kCancellation * den) return std::nullopt;
  return std::abs(nl.f(sum) - fs) / den;
}

std::optional<double> acp2_ratio_opt(const Nonlinearity& nl, std::span<const double> u, double beta) {
  double sum = 0.0, abs_sum = 0.0, Fs = 0.0, fs = 0.0, cross = 0.0;
  for (double v : u) {
    sum += v;
    abs_sum += std::abs(v);
  }
  double den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double fi = nl.f(u[i]);
    Fs += nl.F(u[i]);
    fs += fi * u[i];
    cross += fi * sum;
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const double a = std::abs(u[i] * u[j]);
      den += std::pow(a, 1.0 + 0.5 * beta) + std::pow(a, beta) * (abs_sum - std::abs(u[i]) - std::abs(u[j]));
    }
  }
  if (!(den > kDenGuard)) return std::nullopt;
  double scale = std::abs(nl.F(sum));
  for (double v : u) scale += nl.F(v) + std::abs(nl.f(v) * (sum - v));
  if (kRounding * scale > kCancellation * den) return std::nullopt;
  // Σ_{i≠j} f(u_i) u_j = Σ_i f(u_i) (Σu - u_i)
  return std::abs(nl.F(sum) - Fs - (cross - fs)) / den;
}

// Running sup over n samples drawn block by block; draw(rng) returns the ratio.
template <class Draw>
SupResult running_sup(std::size_t n_samples, std::uint64_t seed, const Draw& draw) {
  if (n_samples < 10000) throw DomainError("sampling suites need n_samples >= 1e4");
  const std::size_t blocks = (n_samples + kBlock - 1) / kBlock;
  const std::size_t half = n_samples / 2;
  struct Stat {
    double first = 0.0, second = 0.0;
    std::size_t excluded = 0;
  };
  std::vector<Stat> stats(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::mt19937_64 rng(derive_seed(seed, 0x7375, b));
    Stat st;
    const std::size_t end = std::min(n_samples, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const std::optional<double> r = draw(rng);
      if (!r) {
        ++st.excluded;
        continue;
      }
      if (!std::isfinite(*r)) throw InvariantViolation("non-finite ratio in sampling suite");
      (i < half ? st.first : st.second) = std::max(i < half ? st.first : st.second, *r);
    }
    stats[b] = st;
  });
  SupResult res;
  res.n_samples = n_samples;
  res.seed = seed;
  for (const auto& st : stats) {
    res.sup_half = std::max(res.sup_half, st.first);
    res.sup = std::max({res.sup, st.first, st.second});
    res.excluded += st.excluded;
  }
  res.pass = std::isfinite(res.sup) && res.sup_half > 0.0 && res.sup / res.sup_half - 1.0 < 0.01;
  return res;
}

// Half the samples uniform in the cube; the rest with 2..n nonzero entries of
// random sign, magnitudes either log-uniform over six decades below u_bar
// or clustered near u_bar.
void draw_point(std::mt19937_64& rng, int n, double u_bar, std::vector<double>& u) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  u.assign(n, 0.0);
  if (unit(rng) < 0.5) {
    for (double& v : u) v = u_bar * (2.0 * unit(rng) - 1.0);
    return;
  }
  std::uniform_int_distribution<int> support(2, n);
  const int k = support(rng);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
    const double w = unit(rng);
    const double mag = unit(rng) < 0.5 ? u_bar * std::pow(10.0, -6.0 * w) : u_bar * (1.0 - w * w * w);
    u[idx[i]] = unit(rng) < 0.5 ? -mag : mag;
  }
}

void check_sampling_args(int n, double u_bar, double beta) {
  if (n < 2 || n > 12) throw DomainError("n must lie in [2, 12]");
  if (!(u_bar > 0.0) || !std::isfinite(u_bar)) throw DomainError("u_bar must be positive");
  if (!(beta > 0.0) || beta > 1.0) throw DomainError("beta must lie in (0, 1]");
}

}  // namespace

double cmp_ratio(const Nonlinearity& nl, double t, double u) { return cmp_ratio_opt(nl, t, u).value_or(0.0); }

double f_ratio(const Nonlinearity& nl, std::span<const double> u, double beta) {
  return f_ratio_opt(nl, u, beta).value_or(0.0);
}

double acp2_ratio(const Nonlinearity& nl, std::span<const double> u, double beta) {
  return acp2_ratio_opt(nl, u, beta).value_or(0.0);
}

SupResult check_scaling_defect(const Nonlinearity& nl, std::size_t n_samples, std::uint64_t seed) {
  return running_sup(n_samples, seed, [&](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> t(0.0, 2.0), u(-10.0, 10.0);
    const double tv = t(rng);
    return cmp_ratio_opt(nl, tv, u(rng));
  });
}

SupResult check_force_splitting(const Nonlinearity& nl, int n, double u_bar, double beta, std::size_t n_samples,
                        std::uint64_t seed) {
  check_sampling_args(n, u_bar, beta);
  return running_sup(n_samples, seed, [&](std::mt19937_64& rng) {
    std::vector<double> u;
    draw_point(rng, n, u_bar, u);
    return f_ratio_opt(nl, u, beta);
  });
}

SupResult check_energy_splitting(const Nonlinearity& nl, int n, double u_bar, double beta, std::size_t n_samples,
                           std::uint64_t seed) {
  check_sampling_args(n, u_bar, beta);
  SupResult res = running_sup(n_samples, seed, [&](std::mt19937_64& rng) {
    std::vector<double> u;
    draw_point(rng, n, u_bar, u);
    return acp2_ratio_opt(nl, u, beta);
  });
  if (n == 2) {
    constexpr int G = 400;
    std::vector<double> rows(G, 0.0);
    parallel_for(G, [&](std::size_t i) {
      const double a = u_bar * (-1.0 + 2.0 * (static_cast<double>(i) + 0.5) / G);
      for (int j = 0; j < G; ++j) {
        const double u[2] = {a, u_bar * (-1.0 + 2.0 * (j + 0.5) / G)};
        rows[i] = std::max(rows[i], acp2_ratio_opt(nl, u, beta).value_or(0.0));
      }
    });
    res.grid_sup = *std::max_element(rows.begin(), rows.end());
    res.pass = res.pass && std::abs(*res.grid_sup - res.sup) <= 0.1 * res.sup;
  }
  return res;
}

// ---------------------------------------------------------------------------
// decay facts

DecayBounds check_decay_bounds(const RadialProfile& profile) {
  const auto& r = profile.grid();
  const int N = profile.dimension();
  const double re = profile.r_end();
  const double kappa = profile.kappa_inf();
  DecayBounds b;
  b.b1 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.size() && r[k] <= re; ++k) {
    const double w = profile.omega()[k] * std::pow(1.0 + r[k], N - 2.0);
    const double g = std::abs(profile.omega_prime()[k]) * std::pow(1.0 + r[k], N - 1.0);
    b.b1 = std::min(b.b1, w);
    b.b2 = std::max(b.b2, w);
    b.b3 = std::max(b.b3, g);
  }
  if (kappa > 0.0) {
    // tail κ r^{2-N}: the weighted values run monotonically from r_end to their limits
    const double w_end = kappa * std::pow(1.0 + 1.0 / re, N - 2.0);
    const double g_end = (N - 2.0) * kappa * std::pow(1.0 + 1.0 / re, N - 1.0);
    b.b1 = std::min({b.b1, w_end, kappa});
    b.b2 = std::max({b.b2, w_end, kappa});
    b.b3 = std::max({b.b3, g_end, (N - 2.0) * kappa});
  }
  b.pass = b.b1 > 0.0 && b.b1 <= b.b2 && std::isfinite(b.b2) && std::isfinite(b.b3);
  return b;
}

TailCheck check_tail_monotonicity(const RadialProfile& profile) {
  TailCheck t;
  t.first_violation = first_tail_violation(profile, 1e-8);
  t.pass = !t.first_violation.has_value();
  return t;
}

}  // namespace nodal
