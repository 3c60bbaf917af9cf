// One PASS/FAIL line per acceptance criterion. Exit status 0 iff all pass.
// Usage: nodal_acceptance [--only k[,k...]] [--mc-samples n]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "nodal/ansatz.hpp"
#include "nodal/parallel.hpp"
#include "nodal/profile_io.hpp"
#include "nodal/radial_ode.hpp"
#include "nodal/symmetry.hpp"
#include "nodal/verify.hpp"

using namespace nodal;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Nonlinearity& nl534() {
  static const Nonlinearity nl = Nonlinearity::family(make_params(5, 3, 4));
  return nl;
}

std::shared_ptr<const RadialProfile> ground_state() {
  static const auto p = std::make_shared<const RadialProfile>(shoot_ground_state(nl534()).profile);
  return p;
}

std::size_t g_mc_samples = 1000000;

Verdict ground_state_validity() {
  const auto t0 = std::chrono::steady_clock::now();
  const RadialProfile& p = *ground_state();
  const Residuals r = pohozaev_nehari_residuals(p, nl534());
  const auto& g = p.grid();
  const double slope = fit_log_slope(g, p.omega(), 0.1 * g.back(), g.back());
  const TailCheck tail = check_tail_monotonicity(p);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = r.nehari < 1e-4 && r.pohozaev < 1e-4 && std::abs(slope / -3.0 - 1.0) <= 0.02 && tail.pass &&
                  secs < 60.0;
  return {ok, fmt("a*=%.12g nehari=%.2e pohozaev=%.2e tail slope=%.5f monotone=%s c0=%.8g (%.2f s, limit 60 s)",
                  p.a_star(), r.nehari, r.pohozaev, slope, tail.pass ? "yes" : "no", p.c0(), secs)};
}

Verdict decay_constant_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const C0Result c = C0_limit(*ground_state(), nl534());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = c.relative_difference <= 0.01 && secs < 120.0;
  return {ok, fmt("C0 fit=%.8g kappa*int f=%.8g rel diff=%.2e (tol 1e-2) (%.2f s, limit 120 s)", c.C0, c.C0_check,
                  c.relative_difference, secs)};
}

Verdict threshold_table() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / "nodal-acceptance-threshold";
  fs::remove_all(dir);
  std::ostringstream sink;
  cli::Context ctx;
  ctx.config.output_dir = dir.string();
  ctx.out = &sink;
  const int rc = cli::cmd_threshold(ctx);
  std::map<int, std::vector<std::string>> rows;
  std::istringstream in(read_file(dir / "threshold" / "threshold.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() == 6) rows[std::stoi(cells[0])] = cells;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto cell = [&](int N, int k) { return rows.count(N) ? rows[N][k] : std::string("?"); };
  const bool ok = rc == 0 && cell(5, 3) == "6" && cell(6, 3) == "6" && cell(7, 3) == "5" && cell(5, 4) == "12" &&
                  cell(7, 4) == "10" && cell(5, 2) == "7" && cell(7, 2) == "6" && cell(5, 5) == "1" &&
                  cell(7, 5) == "1" && secs < 1.0;
  return {ok, fmt("m_min(5,6,7)=%s,%s,%s constants %sc0,%sc0 ceil psi(5,7)=%s,%s flagged=%s,%s (%.3f s, limit 1 s)",
                  cell(5, 3).c_str(), cell(6, 3).c_str(), cell(7, 3).c_str(), cell(5, 4).c_str(), cell(7, 4).c_str(),
                  cell(5, 2).c_str(), cell(7, 2).c_str(), cell(5, 5).c_str(), cell(7, 5).c_str(), secs)};
}

std::optional<BoundReport> g_report;
double g_report_secs = 0.0;

const BoundReport& energy_report() {
  if (!g_report) {
    const auto t0 = std::chrono::steady_clock::now();
    AnsatzOptions o;
    o.mc_samples = g_mc_samples;
    g_report = bound_check(ground_state(), nl534(), 6, {10.0, 20.0, 40.0, 80.0}, o);
    g_report_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  return *g_report;
}

Verdict energy_certification() {
  const BoundReport& r = energy_report();
  bool agree = true;
  std::string rows;
  for (const BoundRow& row : r.rows) {
    agree = agree && row.methods_agree;
    rows += fmt(" R=%g J=%.6g+-%.2g direct=%.6g+-%.2g;", row.R, row.J_decomposed, row.J_decomposed_err, row.J_direct,
                row.J_direct_err);
  }
  const bool exponent_ok = std::abs(r.leading_exponent / -3.0 - 1.0) <= 0.05;
  const bool ok = agree && r.certified() && r.chain_lower && exponent_ok && g_report_secs < 1800.0;
  return {ok, fmt("12c0=%.8g 2c0=%.8g certified at R=%s chain=%s L slope=%.4f agree=%s;", 12 * r.c0, 2 * r.c0,
                  r.least_certified_R ? format_double(*r.least_certified_R).c_str() : "none",
                  r.chain_lower ? "yes" : "no", r.leading_exponent, agree ? "yes" : "no") +
                  rows + fmt(" (%.1f s at mc_samples=%zu, limit 1800 s)", g_report_secs, g_mc_samples)};
}

Verdict nehari_scale_check() {
  const BoundReport& r = energy_report();
  AnsatzOptions o;
  o.mc_samples = 100000;
  const NehariResult single = nehari_scale(AnsatzState::single_bump(ground_state(), 10.0), nl534(), o);
  std::string ts;
  for (const BoundRow& row : r.rows) ts += fmt(" %.8f", row.t_R);
  const bool ok = r.t_monotone && std::abs(single.t - 1.0) <= 1e-6;
  return {ok, fmt("t_R:%s strictly approaching 1=%s single bump |t-1|=%.2e (tol 1e-6)", ts.c_str(),
                  r.t_monotone ? "yes" : "no", std::abs(single.t - 1.0))};
}

Verdict scaling_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = 0;
  int passed = 0, total = 0;
  double worst = -INFINITY;
  for (int n = 2; n <= 3; ++n) {
    for (int k = 0; k < 5; ++k) {
      const CmConfig c = random_cm_config(n, 5, derive_seed(seed, n, k));
      const CmResult r = check_interaction_decay(c, default_cm_ladder());
      ++total;
      passed += r.pass;
      worst = std::max(worst, r.fitted_exponent / r.mu);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = passed == total && secs < 300.0;
  return {ok, fmt("%d/%d configurations pass; largest slope/mu=%.4f (need <= -0.95) (%.1f s, limit 300 s)", passed,
                  total, worst, secs)};
}

Verdict inequality_suites() {
  const Nonlinearity& nl = nl534();
  const std::size_t n = 100000;
  const double u_bar = ground_state()->a_star();
  const SupResult cmp = check_scaling_defect(nl, n, 0);
  const SupResult f = check_force_splitting(nl, 12, u_bar, 1.0, n, 0);
  const SupResult a12 = check_energy_splitting(nl, 12, u_bar, 1.0, n, 0);
  const SupResult a2 = check_energy_splitting(nl, 2, u_bar, 1.0, n, 0);
  auto growth = [](const SupResult& r) { return r.sup / r.sup_half - 1.0; };

  const std::vector<double> opposite{1.3, -1.3}, single{0.0, 2.0, 0.0};
  const bool zeros = cmp_ratio(nl, 1.0, 2.0) == 0.0 && cmp_ratio(nl, 0.5, 0.0) == 0.0 &&
                     f_ratio(nl, opposite, 1.0) == 0.0 && f_ratio(nl, single, 1.0) == 0.0 &&
                     acp2_ratio(nl, single, 1.0) == 0.0 && nl.f(0.0) == 0.0 && nl.F(0.0) == 0.0;
  const double grid_gap = a2.grid_sup ? std::abs(a2.sup - *a2.grid_sup) / *a2.grid_sup : INFINITY;
  const bool ok = cmp.pass && f.pass && a12.pass && a2.pass && zeros && grid_gap <= 0.1;
  return {ok, fmt("growth over final half: cmp=%.2e f=%.2e acp2(12)=%.2e acp2(2)=%.2e (tol 1e-2); sups %.4g %.4g "
                  "%.4g %.4g; zeros=%s; grid sup=%.5g vs sampled %.5g gap=%.2e (tol 0.1)",
                  growth(cmp), growth(f), growth(a12), growth(a2), cmp.sup, f.sup, a12.sup, a2.sup,
                  zeros ? "exact" : "NOT exact", a2.grid_sup.value_or(NAN), a2.sup, grid_gap)};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

Verdict determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path base = fs::temp_directory_path() / "nodal-acceptance-determinism";
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> runs;
  std::vector<std::string> labels;
  bool rc_ok = true;
  for (std::size_t w : {1, 2, 8, 8}) {
    set_worker_count(w);
    const fs::path dir = base / ("run" + std::to_string(runs.size()));
    std::ostringstream sink;
    cli::Context ctx;
    ctx.config.output_dir = dir.string();
    ctx.config.seed = 42;
    ctx.config.mc_samples = 100000;
    ctx.config.R_ladder = std::vector<double>{10.0, 20.0};
    ctx.config.cm_configs = 1;
    ctx.config.cm_ladder = {128.0, 256.0, 512.0};
    ctx.out = &sink;
    ctx.json = true;
    rc_ok = rc_ok && cli::cmd_ground_state(ctx) == cli::kPass;
    rc_ok = rc_ok && cli::cmd_orbit(ctx) == cli::kPass;
    rc_ok = rc_ok && cli::cmd_threshold(ctx) == cli::kPass;
    cli::cmd_interaction(ctx);
    cli::cmd_energy_curve(ctx);
    for (const char* s : {"cm", "cmp", "f", "acp2", "decay", "tail"}) cli::cmd_verify(ctx, s);
    auto files = snapshot(dir);
    files["stdout"] = sink.str();
    runs.push_back(std::move(files));
  }
  set_worker_count(0);
  std::string diff;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].size() != runs[0].size()) diff += " file count differs;";
    for (const auto& [name, text] : runs[0]) {
      const auto it = runs[k].find(name);
      if (it == runs[k].end() || it->second != text) diff += " " + name;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = rc_ok && diff.empty();
  return {ok, fmt("%zu files per run compared across workers 1, 2, 8 and an 8-worker rerun; differing:%s (%.1f s)",
                  runs[0].size(), diff.empty() ? " none" : diff.c_str(), secs)};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string k; std::getline(ss, k, ',');) only.push_back(std::stoi(k));
    } else if (a == "--mc-samples" && i + 1 < argc) {
      g_mc_samples = std::stoull(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only k[,k...]] [--mc-samples n]\n", argv[0]);
      return 1;
    }
  }
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"ground state validity", ground_state_validity},
      {"decay constant consistency", decay_constant_consistency},
      {"threshold table", threshold_table},
      {"energy bound certification", energy_certification},
      {"Nehari scale", nehari_scale_check},
      {"interaction scaling suite", scaling_suite},
      {"inequality suites", inequality_suites},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("criterion %d [%s]: %s  %s\n", id, criteria[k].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
