#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nodal/model.hpp"

namespace nodal::cli {

/// Malformed or invalid configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int N = 5;
  double p = 3.0;
  double q = 4.0;
  std::optional<int> m;                   // default m_min_exact(N)
  std::optional<std::vector<double>> R_ladder;  // default by N
  double r_max = 1e3;
  int points_per_decade = 200;
  double ode_rtol = 1e-13;
  double root_tol = 1e-14;
  std::size_t mc_samples = 1000000;
  std::uint64_t seed = 0;
  std::string output_dir = "nodal-out";

  // verify suites
  std::size_t verify_samples = 100000;
  double beta = 1.0;
  int cm_configs = 5;
  std::vector<double> cm_thetas;          // explicit cm configuration, 2 or 3 entries
  std::vector<double> cm_ladder = {128, 256, 512, 1024, 2048, 4096};
  std::string profile;                    // profile CSV for decay/tail instead of the ground state

  // threshold and interaction
  int threshold_N_min = 5;
  int threshold_N_max = 20;
  std::vector<double> separations;        // empty: default C0 ladder

  ModelParams params() const { return make_params(N, p, q); }
  int resolved_m() const;
  std::vector<double> resolved_R_ladder() const;
};

/// Flat `key = value` text with `#` comments. Unknown or repeated keys are errors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text: every key in fixed order, shortest round-trip numbers.
std::string serialize_config(const RunConfig& config);

/// Throws ConfigError naming the first violated invariant.
void validate_config(const RunConfig& config);

/// FNV-1a hash of the inputs that determine the ground state profile.
std::uint64_t profile_key(const RunConfig& config);

}  // namespace nodal::cli
