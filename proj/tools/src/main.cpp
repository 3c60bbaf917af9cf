#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "nodal/errors.hpp"

namespace cli = nodal::cli;

int main(int argc, char** argv) {
  CLI::App app{"nodal-lab: ground states and nodal energy bounds for -Δu = f(u)"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool json = false;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--seed", seed, "64-bit seed overriding the configuration");
  app.add_option("--out", out_dir, "output directory overriding the configuration");
  app.add_flag("--json", json, "print the JSON summary on stdout");

  auto* ground = app.add_subcommand("ground-state", "shoot the ground state, write profile CSV and summary");
  auto* orbit = app.add_subcommand("orbit", "orbit distance matrix and sign conditions");
  auto* threshold = app.add_subcommand("threshold", "psi(N), exact m_min(N) and energy levels 2m c0");
  auto* interaction = app.add_subcommand("interaction", "decay constant C0 by fit and by kappa * int f(omega)");
  auto* energy = app.add_subcommand("energy-curve", "energy of the nodal ansatz over the R ladder");
  auto* verify = app.add_subcommand("verify", "property suites: cm, cmp, f, acp2, decay, tail, all");
  std::string suite;
  verify->add_option("suite", suite, "suite name")->required();
  auto* report = app.add_subcommand("report", "run everything and write a combined report");
  auto* dump = app.add_subcommand("config", "print the canonical configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kUsage;
  }

  try {
    cli::Context ctx;
    if (!config_path.empty()) ctx.config = cli::load_config(config_path);
    if (seed) ctx.config.seed = *seed;
    if (out_dir) ctx.config.output_dir = *out_dir;
    cli::validate_config(ctx.config);
    ctx.json = json;
    ctx.out = &std::cout;

    if (*dump) {
      std::cout << cli::serialize_config(ctx.config);
      return cli::kPass;
    }
    if (*ground) return cli::cmd_ground_state(ctx);
    if (*orbit) return cli::cmd_orbit(ctx);
    if (*threshold) return cli::cmd_threshold(ctx);
    if (*interaction) return cli::cmd_interaction(ctx);
    if (*energy) return cli::cmd_energy_curve(ctx);
    if (*verify) return cli::cmd_verify(ctx, suite);
    if (*report) return cli::cmd_report(ctx);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const nodal::DomainError& e) {
    std::cerr << "rejected: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return cli::kFail;
  }
  return cli::kUsage;
}
