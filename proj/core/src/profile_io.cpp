#include "nodal/profile_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nodal/errors.hpp"

namespace nodal {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw DomainError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string profile_csv(const RadialProfile& profile) {
  const ModelParams& pm = profile.params();
  std::string out;
  out.reserve(64 * profile.grid().size() + 256);
  out += "# nodal-energy-lab profile v1, N=" + std::to_string(pm.N) + ", p=" + format_double(pm.p) +
         ", q=" + format_double(pm.q) + ", a_star=" + format_double(profile.a_star()) +
         ", kappa_inf=" + format_double(profile.kappa_inf()) + ", c0=" + format_double(profile.c0()) + "\n";
  out += "r,omega,omega_prime\n";
  const auto& r = profile.grid();
  for (std::size_t k = 0; k < r.size(); ++k) {
    out += format_double(r[k]);
    out += ',';
    out += format_double(profile.omega()[k]);
    out += ',';
    out += format_double(profile.omega_prime()[k]);
    out += '\n';
  }
  return out;
}

ProfileTable parse_profile_csv(std::string_view text) {
  ProfileTable t;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t e = text.find('\n', pos);
    if (e == std::string_view::npos) e = text.size();
    line = text.substr(pos, e - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = e + 1;
    return true;
  };
  std::string_view line;
  const std::string_view magic = "# nodal-energy-lab profile v1";
  if (!next_line(line) || line.substr(0, magic.size()) != magic) {
    throw DomainError("missing profile header line");
  }
  bool seen[6] = {};
  std::string_view rest = line.substr(magic.size());
  while (!rest.empty()) {
    std::size_t comma = rest.find(',');
    std::string_view field = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    if (field.empty()) continue;
    const std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) throw DomainError("bad header field");
    const std::string_view key = field.substr(0, eq);
    const double v = parse_double(field.substr(eq + 1));
    if (key == "N") {
      t.N = static_cast<int>(v);
      seen[0] = true;
    } else if (key == "p") {
      t.p = v;
      seen[1] = true;
    } else if (key == "q") {
      t.q = v;
      seen[2] = true;
    } else if (key == "a_star") {
      t.a_star = v;
      seen[3] = true;
    } else if (key == "kappa_inf") {
      t.kappa_inf = v;
      seen[4] = true;
    } else if (key == "c0") {
      t.c0 = v;
      seen[5] = true;
    }
  }
  for (bool s : seen) {
    if (!s) throw DomainError("profile header lacks a required field");
  }
  if (!next_line(line) || line != "r,omega,omega_prime") throw DomainError("missing profile column row");
  while (next_line(line)) {
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw DomainError("profile row needs three columns");
    t.r.push_back(parse_double(line.substr(0, c1)));
    t.omega.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
    t.omega_prime.push_back(parse_double(line.substr(c2 + 1)));
  }
  return t;
}

RadialProfile profile_from_table(const ProfileTable& t, const Nonlinearity* nl) {
  ModelParams pm{t.N, t.p, t.q, 1.0, t.p};
  RadialProfile prof = [&] {
    if (nl == nullptr) return RadialProfile::from_samples(pm, t.r, t.omega, t.omega_prime);
    const int N = nl->dimension();
    std::vector<double> d2(t.r.size());
    for (std::size_t k = 0; k < t.r.size(); ++k) {
      d2[k] = t.r[k] == 0.0 ? -nl->f(t.omega[k]) / N
                            : -(N - 1.0) / t.r[k] * t.omega_prime[k] - nl->f(t.omega[k]);
    }
    return RadialProfile::from_solution(nl->params(), t.r, t.omega, t.omega_prime, std::move(d2), t.a_star);
  }();
  return prof.with_energy(t.c0);
}

}  // namespace nodal
