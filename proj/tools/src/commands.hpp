#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "config.hpp"
#include "nodal/model.hpp"
#include "nodal/radial_ode.hpp"

namespace nodal::cli {

enum ExitCode : int { kPass = 0, kUsage = 1, kFail = 2, kInconclusive = 3 };

/// 2 dominates 3, which dominates 0.
int worst(int a, int b);

struct Context {
  RunConfig config;
  bool json = false;  // print the JSON summary instead of text
  std::ostream* out = nullptr;
};

/// Ground state from output_dir/cache, shot and stored on a miss. The result
/// is always rebuilt from the CSV text so cached and fresh runs agree bit for bit.
std::shared_ptr<const RadialProfile> load_ground_state(const RunConfig& config, const Nonlinearity& nl);

int cmd_ground_state(const Context& ctx);
int cmd_orbit(const Context& ctx);
int cmd_threshold(const Context& ctx);
int cmd_interaction(const Context& ctx);
int cmd_energy_curve(const Context& ctx);
/// suite ∈ {cm, cmp, f, acp2, decay, tail, all}; unknown names throw ConfigError.
int cmd_verify(const Context& ctx, const std::string& suite);
int cmd_report(const Context& ctx);

}  // namespace nodal::cli
