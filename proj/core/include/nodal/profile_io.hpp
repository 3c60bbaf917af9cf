#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nodal/radial_ode.hpp"

namespace nodal {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
/// Parses a full decimal (or nan/inf) token; throws DomainError otherwise.
double parse_double(std::string_view text);

/// Writes content to path through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Contents of a profile CSV:
///   # nodal-energy-lab profile v1, N=5, p=3, q=4, a_star=..., kappa_inf=..., c0=...
///   r,omega,omega_prime
///   ...
struct ProfileTable {
  int N = 0;
  double p = 0.0, q = 0.0;
  double a_star = 0.0, kappa_inf = 0.0, c0 = 0.0;
  std::vector<double> r, omega, omega_prime;
};

std::string profile_csv(const RadialProfile& profile);
ProfileTable parse_profile_csv(std::string_view text);

/// Rebuilds a profile. With a nonlinearity ω'' comes from the radial equation
/// (exact for a solution); without one it is estimated from ω'.
RadialProfile profile_from_table(const ProfileTable& table, const Nonlinearity* nl);

}  // namespace nodal
