#pragma once

#include <string>
#include <vector>

#include "cuspdet/detz.hpp"
#include "cuspdet/spectral.hpp"

/// Every numerical default in one table, addressable by name for --tol overrides.
namespace cuspdet {

struct Settings {
  static constexpr int version = 1;

  detz::DetOptions det;  ///< carries the trace and solver options
  spectral::FdOptions fd;
  double fd_r_mu = 40.0;  ///< default FD radius is fd_r_mu / mu
  int fd_n = 8000;
  int z_grid_points = 25;     ///< trace fit grid on [20, 400] max(1, mu a)
  double compare_tol = 1e-3;  ///< cross-method and LIM tolerance in `compare`
};

struct SettingEntry {
  std::string name;
  double value;
  std::string description;
};

/// Rows in a fixed order.
std::vector<SettingEntry> settings_table(const Settings& s);

/// Sets one entry. Throws DomainError for unknown names or values outside the entry's range.
void apply_setting(Settings& s, const std::string& name, double value);

}  // namespace cuspdet
