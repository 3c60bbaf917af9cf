#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "commands.hpp"
#include "config.hpp"
#include "nodal/profile_io.hpp"

#include "json.hpp"

using namespace nodal;
using namespace nodal::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nodal-cli-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_lab(const std::string& args) {
  const std::string cmd = std::string(NODAL_LAB_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("configuration text round-trips") {
  RunConfig c = parse_config(
      "# comment\n"
      "N = 6\n"
      "p = 2.9   # trailing\n"
      "q = 4.5\n"
      "m = 9\n"
      "R_ladder = 6, 12, 24\n"
      "seed = 18446744073709551615\n"
      "cm_thetas = 4, 4.5\n");
  CHECK(c.N == 6);
  CHECK(c.p == 2.9);
  CHECK(*c.m == 9);
  CHECK(*c.R_ladder == std::vector<double>{6, 12, 24});
  CHECK(c.seed == 18446744073709551615ull);
  const std::string text = serialize_config(c);
  CHECK(serialize_config(parse_config(text)) == text);
  CHECK(serialize_config(parse_config(serialize_config(RunConfig{}))) == serialize_config(RunConfig{}));
}

TEST_CASE("configuration parse errors") {
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N = 5\nN = 6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N = five\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("p = 3.0.1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/nodal.cfg"), ConfigError);
}

TEST_CASE("configuration validation") {
  CHECK_NOTHROW(validate_config(RunConfig{}));
  auto bad = [](auto edit) {
    RunConfig c;
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.N = 4; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.p = 2.0; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.q = 2.5; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.R_ladder = std::vector<double>{}; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.R_ladder = std::vector<double>{20, 10}; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.beta = 1.5; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.mc_samples = 10; })), ConfigError);
  CHECK_THROWS_AS(validate_config(bad([](RunConfig& c) { c.cm_thetas = {4.0}; })), ConfigError);
}

TEST_CASE("default ladders and m") {
  RunConfig c;
  CHECK(c.resolved_m() == 6);
  CHECK(c.resolved_R_ladder() == std::vector<double>{10, 20, 40, 80});
  c.N = 7;
  CHECK(c.resolved_R_ladder() == std::vector<double>{6, 12, 24, 48});
}

TEST_CASE("profile key follows the inputs of the shot") {
  RunConfig a, b;
  CHECK(profile_key(a) == profile_key(b));
  b.seed = 99;
  CHECK(profile_key(a) == profile_key(b));
  b.p = 3.1;
  CHECK(profile_key(a) != profile_key(b));
}

TEST_CASE("cached and fresh ground states agree bit for bit") {
  RunConfig c;
  c.output_dir = scratch("cache").string();
  const auto nl = Nonlinearity::family(c.params());
  const auto fresh = load_ground_state(c, nl);
  const auto cached = load_ground_state(c, nl);
  CHECK(profile_csv(*fresh) == profile_csv(*cached));
  CHECK(fresh->c0() == cached->c0());
}

TEST_CASE("ground-state command writes byte-identical output on rerun") {
  std::ostringstream sink;
  Context ctx;
  ctx.config.output_dir = scratch("gs").string();
  ctx.out = &sink;
  CHECK(cmd_ground_state(ctx) == kPass);
  const fs::path dir = fs::path(ctx.config.output_dir) / "ground-state";
  const std::string csv = read_file(dir / "profile.csv");
  const std::string summary = read_file(dir / "summary.json");
  const auto j = nlohmann::json::parse(summary);
  CHECK(j.at("status") == "pass");
  CHECK(cmd_ground_state(ctx) == kPass);
  CHECK(read_file(dir / "profile.csv") == csv);
  CHECK(read_file(dir / "summary.json") == summary);
}

TEST_CASE("threshold command tabulates every dimension") {
  std::ostringstream sink;
  Context ctx;
  ctx.config.output_dir = scratch("thr").string();
  ctx.out = &sink;
  CHECK(cmd_threshold(ctx) == kPass);
  const std::string csv = read_file(fs::path(ctx.config.output_dir) / "threshold" / "threshold.csv");
  std::istringstream in(csv);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "N,psi,ceil_psi,m_min_exact,energy_level,discrepancy");
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 16);
}

TEST_CASE("exit codes of the binary") {
  const fs::path dir = scratch("exit");
  const std::string out = " --out " + dir.string();
  CHECK(run_lab("threshold" + out) == 0);
  CHECK(run_lab("no-such-command" + out) == 1);
  CHECK(run_lab("verify no-such-suite" + out) == 1);

  auto write_cfg = [&](const std::string& name, const std::string& text) {
    write_file_atomic(dir / name, text);
    return " --config " + (dir / name).string() + out;
  };
  CHECK(run_lab("ground-state" + write_cfg("bad_p.cfg", "p = 1.5\n")) == 1);
  CHECK(run_lab("energy-curve" + write_cfg("m5.cfg", "m = 5\n")) == 1);
  CHECK(run_lab("energy-curve" + write_cfg("empty.cfg", "R_ladder =\n")) == 1);
  CHECK(run_lab("config" + write_cfg("unknown.cfg", "colour = red\n")) == 1);

  // decaying stub with a bump: the tail check must fail
  std::string csv = "# nodal-energy-lab profile v1, N=5, p=3, q=4, a_star=1, kappa_inf=1, c0=1\nr,omega,omega_prime\n";
  for (int k = 0; k <= 400; ++k) {
    const double r = k == 0 ? 0.0 : std::pow(10.0, -1.0 + 5.0 * k / 400.0);
    const double g = 1.0 + 0.5 * std::exp(-(r - 10.0) * (r - 10.0));
    const double dg = -(r - 10.0) * std::exp(-(r - 10.0) * (r - 10.0));
    const double w = std::pow(1.0 + r, -3.0) * g;
    const double wp = -3.0 * std::pow(1.0 + r, -4.0) * g + std::pow(1.0 + r, -3.0) * dg;
    csv += format_double(r) + "," + format_double(w) + "," + format_double(wp) + "\n";
  }
  write_file_atomic(dir / "bump.csv", csv);
  CHECK(run_lab("verify tail" + write_cfg("bump.cfg", "profile = " + (dir / "bump.csv").string() + "\n")) == 2);
}
