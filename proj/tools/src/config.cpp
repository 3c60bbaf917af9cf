#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nodal/errors.hpp"
#include "nodal/profile_io.hpp"
#include "nodal/symmetry.hpp"

namespace nodal::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(v) + "'");
  }
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = v.find(',', pos);
    out.push_back(parse_real(key, trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos))));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += format_double(v[k]);
  }
  return s;
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"N", [](RunConfig& c, auto k, auto v) { c.N = parse_int<int>(k, v); }},
      {"p", [](RunConfig& c, auto k, auto v) { c.p = parse_real(k, v); }},
      {"q", [](RunConfig& c, auto k, auto v) { c.q = parse_real(k, v); }},
      {"m", [](RunConfig& c, auto k, auto v) { c.m = parse_int<int>(k, v); }},
      {"R_ladder", [](RunConfig& c, auto k, auto v) { c.R_ladder = parse_list(k, v); }},
      {"r_max", [](RunConfig& c, auto k, auto v) { c.r_max = parse_real(k, v); }},
      {"points_per_decade", [](RunConfig& c, auto k, auto v) { c.points_per_decade = parse_int<int>(k, v); }},
      {"ode_rtol", [](RunConfig& c, auto k, auto v) { c.ode_rtol = parse_real(k, v); }},
      {"root_tol", [](RunConfig& c, auto k, auto v) { c.root_tol = parse_real(k, v); }},
      {"mc_samples", [](RunConfig& c, auto k, auto v) { c.mc_samples = parse_int<std::size_t>(k, v); }},
      {"seed", [](RunConfig& c, auto k, auto v) { c.seed = parse_int<std::uint64_t>(k, v); }},
      {"output_dir", [](RunConfig& c, auto, auto v) { c.output_dir = std::string(v); }},
      {"verify_samples", [](RunConfig& c, auto k, auto v) { c.verify_samples = parse_int<std::size_t>(k, v); }},
      {"beta", [](RunConfig& c, auto k, auto v) { c.beta = parse_real(k, v); }},
      {"cm_configs", [](RunConfig& c, auto k, auto v) { c.cm_configs = parse_int<int>(k, v); }},
      {"cm_thetas", [](RunConfig& c, auto k, auto v) { c.cm_thetas = parse_list(k, v); }},
      {"cm_ladder", [](RunConfig& c, auto k, auto v) { c.cm_ladder = parse_list(k, v); }},
      {"profile", [](RunConfig& c, auto, auto v) { c.profile = std::string(v); }},
      {"threshold_N_min", [](RunConfig& c, auto k, auto v) { c.threshold_N_min = parse_int<int>(k, v); }},
      {"threshold_N_max", [](RunConfig& c, auto k, auto v) { c.threshold_N_max = parse_int<int>(k, v); }},
      {"separations", [](RunConfig& c, auto k, auto v) { c.separations = parse_list(k, v); }},
  };
  return table;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] > v[k - 1])) return false;
  }
  return true;
}

}  // namespace

int RunConfig::resolved_m() const { return m ? *m : m_min_exact(N); }

std::vector<double> RunConfig::resolved_R_ladder() const {
  if (R_ladder) return *R_ladder;
  if (N >= 7) return {6, 12, 24, 48};
  return {10, 20, 40, 80};
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) throw ConfigError("repeated key '" + std::string(key) + "'");
    it->second(c, key, value);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "N = " << c.N << '\n';
  os << "p = " << format_double(c.p) << '\n';
  os << "q = " << format_double(c.q) << '\n';
  if (c.m) os << "m = " << *c.m << '\n';
  if (c.R_ladder) os << "R_ladder = " << list_text(*c.R_ladder) << '\n';
  os << "r_max = " << format_double(c.r_max) << '\n';
  os << "points_per_decade = " << c.points_per_decade << '\n';
  os << "ode_rtol = " << format_double(c.ode_rtol) << '\n';
  os << "root_tol = " << format_double(c.root_tol) << '\n';
  os << "mc_samples = " << c.mc_samples << '\n';
  os << "seed = " << c.seed << '\n';
  os << "output_dir = " << c.output_dir << '\n';
  os << "verify_samples = " << c.verify_samples << '\n';
  os << "beta = " << format_double(c.beta) << '\n';
  os << "cm_configs = " << c.cm_configs << '\n';
  if (!c.cm_thetas.empty()) os << "cm_thetas = " << list_text(c.cm_thetas) << '\n';
  os << "cm_ladder = " << list_text(c.cm_ladder) << '\n';
  if (!c.profile.empty()) os << "profile = " << c.profile << '\n';
  os << "threshold_N_min = " << c.threshold_N_min << '\n';
  os << "threshold_N_max = " << c.threshold_N_max << '\n';
  if (!c.separations.empty()) os << "separations = " << list_text(c.separations) << '\n';
  return os.str();
}

void validate_config(const RunConfig& c) {
  try {
    c.params().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (c.m && *c.m < 2) throw ConfigError("m must be at least 2");
  if (c.R_ladder) {
    if (c.R_ladder->empty()) throw ConfigError("R_ladder is empty");
    if (!strictly_increasing(*c.R_ladder)) throw ConfigError("R_ladder must be strictly increasing");
    if (!(c.R_ladder->front() > 1.0)) throw ConfigError("R_ladder entries must exceed 1");
  }
  if (!(c.r_max > 0.0)) throw ConfigError("r_max must be positive");
  if (c.points_per_decade < 1) throw ConfigError("points_per_decade must be positive");
  if (!(c.ode_rtol > 0.0)) throw ConfigError("ode_rtol must be positive");
  if (!(c.root_tol > 0.0)) throw ConfigError("root_tol must be positive");
  if (c.mc_samples < 10000) throw ConfigError("mc_samples must be at least 10000");
  if (c.verify_samples < 10000) throw ConfigError("verify_samples must be at least 10000");
  if (!(c.beta > 0.0) || c.beta > 1.0) throw ConfigError("beta must lie in (0, 1]");
  if (c.cm_configs < 1) throw ConfigError("cm_configs must be positive");
  if (c.cm_ladder.size() < 2 || !strictly_increasing(c.cm_ladder)) {
    throw ConfigError("cm_ladder needs at least two strictly increasing entries");
  }
  if (!c.cm_thetas.empty() && (c.cm_thetas.size() < 2 || c.cm_thetas.size() > 3)) {
    throw ConfigError("cm_thetas needs 2 or 3 entries");
  }
  if (c.threshold_N_min < 5 || c.threshold_N_max > 20 || c.threshold_N_min > c.threshold_N_max) {
    throw ConfigError("threshold range must lie within [5, 20]");
  }
  for (double s : c.separations) {
    if (!(s > 0.0)) throw ConfigError("separations must be positive");
  }
  if (c.output_dir.empty()) throw ConfigError("output_dir is empty");
}

std::uint64_t profile_key(const RunConfig& c) {
  const std::string text = "N=" + std::to_string(c.N) + ";p=" + format_double(c.p) + ";q=" + format_double(c.q) +
                           ";ode_rtol=" + format_double(c.ode_rtol) + ";r_max=" + format_double(c.r_max) +
                           ";points_per_decade=" + std::to_string(c.points_per_decade);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace nodal::cli
