#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "nodal/ansatz.hpp"
#include "nodal/errors.hpp"
#include "nodal/parallel.hpp"
#include "nodal/profile_io.hpp"
#include "nodal/symmetry.hpp"
#include "nodal/verify.hpp"

namespace nodal::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int worst(int a, int b) {
  auto rank = [](int c) { return c == kFail ? 3 : c == kUsage ? 2 : c == kInconclusive ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

namespace {

struct Outcome {
  json summary;
  int code = kPass;
  std::vector<std::pair<std::string, std::string>> files;  // name relative to the command directory
  std::string text;
};

const char* status(int code) {
  switch (code) {
    case kPass: return "pass";
    case kFail: return "fail";
    case kInconclusive: return "inconclusive";
    default: return "error";
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json model_json(const RunConfig& c) { return {{"N", c.N}, {"p", c.p}, {"q", c.q}}; }

int emit(const Context& ctx, const std::string& dir, const Outcome& o) {
  const fs::path base = fs::path(ctx.config.output_dir) / dir;
  for (const auto& [name, content] : o.files) write_file_atomic(base / name, content);
  write_file_atomic(base / "summary.json", dump(o.summary));
  if (ctx.out) {
    if (ctx.json) {
      *ctx.out << dump(o.summary);
    } else {
      *ctx.out << o.text << "status: " << status(o.code) << "  (" << (base / "summary.json").string() << ")\n";
    }
  }
  return o.code;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome run_ground_state(const RunConfig& c) {
  const Nonlinearity nl = Nonlinearity::family(c.params());
  const auto prof = load_ground_state(c, nl);
  const Residuals res = pohozaev_nehari_residuals(*prof, nl);
  const auto& g = prof->grid();
  const double slope = fit_log_slope(g, prof->omega(), 0.1 * g.back(), g.back());
  const double expected = -(c.N - 2.0);
  const TailCheck tail = check_tail_monotonicity(*prof);
  const bool residual_ok = res.nehari < 1e-4 && res.pohozaev < 1e-4;
  const bool slope_ok = std::abs(slope / expected - 1.0) <= 0.02;

  Outcome o;
  o.code = residual_ok && slope_ok && tail.pass ? kPass : kFail;
  o.summary = {{"command", "ground-state"},
               {"model", model_json(c)},
               {"a_star", prof->a_star()},
               {"c0", prof->c0()},
               {"kappa_inf", prof->kappa_inf()},
               {"kappa_fit_residual", prof->kappa_residual()},
               {"r_end", prof->r_end()},
               {"grid_points", g.size()},
               {"residuals",
                {{"nehari", res.nehari},
                 {"pohozaev", res.pohozaev},
                 {"norm_sq", res.norm_sq},
                 {"f_omega_omega", res.f_omega_omega},
                 {"F_omega", res.F_omega}}},
               {"tail_slope", slope},
               {"expected_tail_slope", expected},
               {"checks",
                {{"residuals_below_1e-4", residual_ok},
                 {"tail_slope_within_2pct", slope_ok},
                 {"tail_monotone", tail.pass}}},
               {"status", status(o.code)},
               {"profile_file", "profile.csv"}};
  o.files.emplace_back("profile.csv", profile_csv(*prof));
  std::ostringstream t;
  t << "a* = " << format_double(prof->a_star()) << "\nc0 = " << format_double(prof->c0())
    << "\nkappa_inf = " << format_double(prof->kappa_inf()) << "\nnehari residual = " << format_double(res.nehari)
    << "\npohozaev residual = " << format_double(res.pohozaev) << "\ntail slope = " << format_double(slope) << '\n';
  o.text = t.str();
  return o;
}

Outcome run_orbit(const RunConfig& c) {
  const int m = c.resolved_m();
  const OrbitConfig orbit = orbit_points(m, c.N);
  const auto D = distance_matrix(orbit);
  const SignCondition exact = sign_condition_exact(m, c.N);
  const SignBounds bounds = sign_condition_bound(m, c.N);
  std::string csv = "i,j,distance\n";
  for (std::size_t i = 0; i < D.size(); ++i) {
    for (std::size_t j = 0; j < D.size(); ++j) {
      csv += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ',' + format_double(D[i][j]) + '\n';
    }
  }
  Outcome o;
  json pts = json::array();
  for (const auto& p : orbit.points) pts.push_back(p);
  o.summary = {{"command", "orbit"},
               {"m", m},
               {"N", c.N},
               {"points", pts},
               {"signs", orbit.signs},
               {"sign_condition_exact", {{"value", exact.value}, {"holds", exact.holds}}},
               {"sign_condition_neighbor", {{"value", bounds.neighbor.value}, {"holds", bounds.neighbor.holds}}},
               {"sign_condition_sin_free", {{"value", bounds.sin_free.value}, {"holds", bounds.sin_free.holds}}},
               {"psi", psi_threshold(c.N)},
               {"status", status(kPass)},
               {"distance_file", "distances.csv"}};
  o.files.emplace_back("distances.csv", csv);
  std::ostringstream t;
  t << "m = " << m << ", N = " << c.N << "\nS(m,N) = " << format_double(exact.value)
    << (exact.holds ? " (holds)\n" : " (fails)\n");
  o.text = t.str();
  return o;
}

Outcome run_threshold(const RunConfig& c) {
  std::string csv = "N,psi,ceil_psi,m_min_exact,energy_level,discrepancy\n";
  json rows = json::array();
  std::ostringstream t;
  for (int N = c.threshold_N_min; N <= c.threshold_N_max; ++N) {
    const double psi = psi_threshold(N);
    const int ceil_psi = static_cast<int>(std::ceil(psi));
    const int mm = m_min_exact(N);
    const bool flag = ceil_psi != mm;
    csv += std::to_string(N) + ',' + format_double(psi) + ',' + std::to_string(ceil_psi) + ',' + std::to_string(mm) +
           ',' + std::to_string(2 * mm) + ',' + (flag ? "1" : "0") + '\n';
    rows.push_back({{"N", N},
                    {"psi", psi},
                    {"ceil_psi", ceil_psi},
                    {"m_min_exact", mm},
                    {"energy_level", 2 * mm},
                    {"discrepancy", flag}});
    t << "N = " << N << ": psi = " << format_double(psi) << ", ceil = " << ceil_psi << ", m_min = " << mm
      << ", constant " << 2 * mm << "c0" << (flag ? "  [ceil psi differs]" : "") << '\n';
  }
  Outcome o;
  o.summary = {{"command", "threshold"}, {"rows", rows}, {"status", status(kPass)}, {"table_file", "threshold.csv"}};
  o.files.emplace_back("threshold.csv", csv);
  o.text = t.str();
  return o;
}

Outcome run_interaction(const RunConfig& c) {
  const Nonlinearity nl = Nonlinearity::family(c.params());
  const auto prof = load_ground_state(c, nl);
  const C0Result r = C0_limit(*prof, nl, c.separations);
  std::string csv = "s,I,scaled\n";
  for (std::size_t k = 0; k < r.separations.size(); ++k) {
    const double s = r.separations[k];
    csv += format_double(s) + ',' + format_double(r.scaled_values[k] / std::pow(s, c.N - 2.0)) + ',' +
           format_double(r.scaled_values[k]) + '\n';
  }
  const bool agree = r.relative_difference <= 0.01;
  Outcome o;
  o.code = !agree || !(r.C0_hat > 0.0) ? kFail : r.convergence_warning ? kInconclusive : kPass;
  o.summary = {{"command", "interaction"},
               {"model", model_json(c)},
               {"C0", r.C0},
               {"C0_check", r.C0_check},
               {"relative_difference", r.relative_difference},
               {"C0_hat", r.C0_hat},
               {"C0_hat_check", r.C0_hat_check},
               {"fit_residual", r.fit_residual},
               {"convergence_warning", r.convergence_warning},
               {"separations", r.separations},
               {"scaled_values", r.scaled_values},
               {"status", status(o.code)},
               {"table_file", "interaction.csv"}};
  o.files.emplace_back("interaction.csv", csv);
  std::ostringstream t;
  t << "C0 (fit) = " << format_double(r.C0) << "\nC0 (kappa * int f) = " << format_double(r.C0_check)
    << "\nrelative difference = " << format_double(r.relative_difference) << "\nC0_hat = " << format_double(r.C0_hat)
    << '\n';
  o.text = t.str();
  return o;
}

Outcome run_energy_curve(const RunConfig& c) {
  const int m = c.resolved_m();
  const SignCondition sc = sign_condition_exact(m, c.N);
  if (!sc.holds) {
    throw ConfigError("sign condition fails for m = " + std::to_string(m) + ", N = " + std::to_string(c.N) +
                      " (S = " + format_double(sc.value) + ")");
  }
  const Nonlinearity nl = Nonlinearity::family(c.params());
  const auto prof = load_ground_state(c, nl);
  const std::vector<double> ladder = c.resolved_R_ladder();
  AnsatzOptions opts;
  opts.mc_samples = c.mc_samples;
  opts.seed = c.seed;
  opts.root_tol = c.root_tol;
  const BoundReport rep = bound_check(prof, nl, m, ladder, opts);

  const double C1 = check_scaling_defect(nl, c.verify_samples, c.seed).sup;
  const double C0_hat = C0_limit(*prof, nl).C0_hat;
  const OrbitConfig orbit = orbit_points(m, c.N);
  json rows = json::array();
  bool agree = true;
  for (const auto& row : rep.rows) {
    const AnsatzState st = AnsatzState(prof, orbit, row.R).with_t(row.t_R);
    const Majorants mj = remainder_majorants(st, C1, C0_hat, c.params().alpha);
    agree = agree && row.methods_agree;
    rows.push_back({{"R", row.R},
                    {"t_R", row.t_R},
                    {"J_decomposed", row.J_decomposed},
                    {"J_decomposed_err", row.J_decomposed_err},
                    {"J_direct", row.J_direct},
                    {"J_direct_err", row.J_direct_err},
                    {"bound_2mc0", row.bound_2mc0},
                    {"margin", row.margin},
                    {"interaction", row.interaction},
                    {"nehari_residual", row.nehari_residual},
                    {"methods_agree", row.methods_agree},
                    {"majorant_scaling", mj.scaling_bound},
                    {"majorant_pair_sum", mj.pair_sum.value},
                    {"majorant_triple_sum", mj.triple_sum.value}});
  }
  const double expected = -(c.N - 2.0);
  Outcome o;
  o.code = !agree ? kFail : rep.certified() ? kPass : kInconclusive;
  o.summary = {{"command", "energy-curve"},
               {"model", model_json(c)},
               {"m", m},
               {"c0", rep.c0},
               {"bound_2mc0", 2.0 * m * rep.c0},
               {"mc_samples", c.mc_samples},
               {"seed", c.seed},
               {"verdict", rep.certified() ? "Certified" : "Inconclusive"},
               {"least_certified_R", rep.least_certified_R ? json(*rep.least_certified_R) : json(nullptr)},
               {"chain_lower_2c0", rep.chain_lower},
               {"methods_agree", agree},
               {"leading_exponent", rep.leading_exponent},
               {"expected_leading_exponent", expected},
               {"leading_exponent_within_5pct", std::abs(rep.leading_exponent / expected - 1.0) <= 0.05},
               {"t_monotone", rep.t_monotone},
               {"C1", C1},
               {"C0_hat", C0_hat},
               {"rows", rows},
               {"status", status(o.code)},
               {"curve_file", "energy_curve.csv"}};
  o.files.emplace_back("energy_curve.csv", energy_curve_csv(rep));
  std::ostringstream t;
  t << "m = " << m << ", 2m c0 = " << format_double(2.0 * m * rep.c0) << '\n';
  for (const auto& row : rep.rows) {
    t << "R = " << format_double(row.R) << ": t_R = " << format_double(row.t_R)
      << ", J = " << format_double(row.J_decomposed) << " +- " << format_double(row.J_decomposed_err)
      << ", direct " << format_double(row.J_direct) << " +- " << format_double(row.J_direct_err) << '\n';
  }
  t << "verdict: " << (rep.certified() ? "Certified" : "Inconclusive");
  if (rep.least_certified_R) t << " at R = " << format_double(*rep.least_certified_R);
  t << '\n';
  o.text = t.str();
  return o;
}

// ---------------------------------------------------------------------------
// verify

json sup_json(const SupResult& r) {
  json j = {{"sup", r.sup},          {"sup_half", r.sup_half}, {"n_samples", r.n_samples},
            {"seed", r.seed},        {"excluded", r.excluded}, {"pass", r.pass}};
  if (r.grid_sup) j["grid_sup"] = *r.grid_sup;
  return j;
}

json cm_json(const CmConfig& cfg, const CmResult& r) {
  json pts = json::array();
  for (const auto& p : cfg.points) pts.push_back(p);
  return {{"n", cfg.points.size()},
          {"thetas", cfg.thetas},
          {"points", pts},
          {"mu", r.mu},
          {"d", r.d},
          {"R", r.R},
          {"I", r.values},
          {"fitted_exponent", r.fitted_exponent},
          {"C_fitted", r.C_fitted},
          {"ratio_spread", r.ratio_spread},
          {"pass", r.pass}};
}

CmConfig explicit_cm(const RunConfig& c) {
  CmConfig cfg;
  cfg.N = c.N;
  cfg.thetas = c.cm_thetas;
  const std::size_t n = c.cm_thetas.size();
  cfg.points.assign(n, Point(c.N, 0.0));
  cfg.points[1][0] = 1.0;
  if (n == 3) {
    cfg.points[2][0] = 0.5;
    cfg.points[2][1] = std::sqrt(3.0) / 2.0;
  }
  return cfg;
}

std::pair<json, int> suite_cm(const RunConfig& c) {
  json list = json::array();
  bool pass = true;
  std::vector<CmConfig> configs;
  if (!c.cm_thetas.empty()) {
    configs.push_back(explicit_cm(c));
  } else {
    for (int n = 2; n <= 3; ++n) {
      for (int k = 0; k < c.cm_configs; ++k) configs.push_back(random_cm_config(n, c.N, derive_seed(c.seed, n, k)));
    }
  }
  for (const auto& cfg : configs) {
    const CmResult r = check_interaction_decay(cfg, c.cm_ladder);
    pass = pass && r.pass;
    list.push_back(cm_json(cfg, r));
  }
  return {{{"suite", "cm"}, {"seed", c.seed}, {"configs", list}, {"pass", pass}}, pass ? kPass : kFail};
}

std::shared_ptr<const RadialProfile> verify_profile(const RunConfig& c, const Nonlinearity& nl) {
  if (c.profile.empty()) return load_ground_state(c, nl);
  const ProfileTable t = parse_profile_csv(read_file(c.profile));
  return std::make_shared<const RadialProfile>(profile_from_table(t, nullptr));
}

std::pair<json, int> run_suite(const RunConfig& c, const std::string& suite) {
  const Nonlinearity nl = Nonlinearity::family(c.params());
  if (suite == "cm") return suite_cm(c);
  if (suite == "cmp") {
    const SupResult r = check_scaling_defect(nl, c.verify_samples, c.seed);
    json j = sup_json(r);
    j["statistic"] = "C1";
    return {{{"suite", "cmp"}, {"result", j}, {"pass", r.pass}}, r.pass ? kPass : kFail};
  }
  if (suite == "f" || suite == "acp2") {
    const auto prof = load_ground_state(c, nl);
    const int n = 2 * c.resolved_m();
    const double u_bar = prof->a_star();
    json out = {{"suite", suite}, {"u_bar", u_bar}, {"beta", c.beta}};
    bool pass = true;
    if (suite == "f") {
      const SupResult r = check_force_splitting(nl, n, u_bar, c.beta, c.verify_samples, c.seed);
      json j = sup_json(r);
      j["n"] = n;
      j["statistic"] = "b1";
      out["results"] = json::array({j});
      pass = r.pass;
    } else {
      json list = json::array();
      for (int k : {n, 2}) {
        const SupResult r = check_energy_splitting(nl, k, u_bar, c.beta, c.verify_samples, c.seed);
        json j = sup_json(r);
        j["n"] = k;
        j["statistic"] = "b2";
        list.push_back(j);
        pass = pass && r.pass;
      }
      out["results"] = list;
    }
    out["pass"] = pass;
    return {out, pass ? kPass : kFail};
  }
  if (suite == "decay") {
    const auto prof = verify_profile(c, nl);
    const DecayBounds b = check_decay_bounds(*prof);
    return {{{"suite", "decay"}, {"b1", b.b1}, {"b2", b.b2}, {"b3", b.b3}, {"pass", b.pass}},
            b.pass ? kPass : kFail};
  }
  if (suite == "tail") {
    const auto prof = verify_profile(c, nl);
    const TailCheck t = check_tail_monotonicity(*prof);
    return {{{"suite", "tail"},
             {"first_violation", t.first_violation ? json(*t.first_violation) : json(nullptr)},
             {"pass", t.pass}},
            t.pass ? kPass : kFail};
  }
  throw ConfigError("unknown verify suite '" + suite + "'");
}

Outcome run_verify(const RunConfig& c, const std::string& suite) {
  static const std::vector<std::string> all = {"cm", "cmp", "f", "acp2", "decay", "tail"};
  if (suite != "all" && std::find(all.begin(), all.end(), suite) == all.end()) {
    throw ConfigError("unknown verify suite '" + suite + "'");
  }
  Outcome o;
  std::ostringstream t;
  if (suite == "all") {
    json suites = json::object();
    for (const auto& s : all) {
      auto [j, code] = run_suite(c, s);
      o.code = worst(o.code, code);
      t << s << ": " << status(code) << '\n';
      suites[s] = j;
    }
    o.summary = {{"command", "verify"}, {"suite", "all"}, {"seed", c.seed}, {"suites", suites}};
  } else {
    auto [j, code] = run_suite(c, suite);
    o.code = code;
    o.summary = {{"command", "verify"}, {"suite", suite}, {"seed", c.seed}, {"report", j}};
  }
  o.summary["status"] = status(o.code);
  o.text = t.str();
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------

std::shared_ptr<const RadialProfile> load_ground_state(const RunConfig& c, const Nonlinearity& nl) {
  const fs::path path = fs::path(c.output_dir) / "cache" / ("profile-" + hex(profile_key(c)) + ".csv");
  std::string text;
  bool hit = false;
  if (fs::exists(path)) {
    text = read_file(path);
    try {
      const ProfileTable t = parse_profile_csv(text);
      hit = t.N == c.N && t.p == c.p && t.q == c.q;
    } catch (const DomainError&) {
      hit = false;
    }
  }
  if (!hit) {
    ShootOptions opts;
    opts.rtol = c.ode_rtol;
    opts.r_max = c.r_max;
    opts.points_per_decade = c.points_per_decade;
    text = profile_csv(shoot_ground_state(nl, opts).profile);
    write_file_atomic(path, text);
  }
  return std::make_shared<const RadialProfile>(profile_from_table(parse_profile_csv(text), &nl));
}

int cmd_ground_state(const Context& ctx) { return emit(ctx, "ground-state", run_ground_state(ctx.config)); }
int cmd_orbit(const Context& ctx) { return emit(ctx, "orbit", run_orbit(ctx.config)); }
int cmd_threshold(const Context& ctx) { return emit(ctx, "threshold", run_threshold(ctx.config)); }
int cmd_interaction(const Context& ctx) { return emit(ctx, "interaction", run_interaction(ctx.config)); }
int cmd_energy_curve(const Context& ctx) { return emit(ctx, "energy-curve", run_energy_curve(ctx.config)); }

int cmd_verify(const Context& ctx, const std::string& suite) {
  return emit(ctx, "verify/" + suite, run_verify(ctx.config, suite));
}

int cmd_report(const Context& ctx) {
  const RunConfig& c = ctx.config;
  Context quiet = ctx;
  quiet.out = nullptr;
  json parts = json::object();
  int code = kPass;
  std::ostringstream t;
  auto step = [&](const std::string& name, const std::string& dir, const Outcome& o) {
    emit(quiet, dir, o);
    parts[name] = o.summary;
    code = worst(code, o.code);
    t << name << ": " << status(o.code) << '\n';
  };
  step("ground-state", "ground-state", run_ground_state(c));
  step("threshold", "threshold", run_threshold(c));
  step("orbit", "orbit", run_orbit(c));
  step("interaction", "interaction", run_interaction(c));
  if (sign_condition_exact(c.resolved_m(), c.N).holds) {
    step("energy-curve", "energy-curve", run_energy_curve(c));
  } else {
    parts["energy-curve"] = {{"status", "skipped"}, {"reason", "sign condition fails for the chosen m"}};
  }
  step("verify", "verify/all", run_verify(c, "all"));
  Outcome o;
  o.code = code;
  o.summary = {{"command", "report"}, {"config", serialize_config(c)}, {"parts", parts}, {"status", status(code)}};
  o.text = t.str();
  return emit(ctx, "report", o);
}

}  // namespace nodal::cli
