#include "cuspdet/settings.hpp"

#include <cmath>
#include <functional>

#include "cuspdet/errors.hpp"

namespace cuspdet {

namespace {

struct Field {
  const char* name;
  const char* description;
  std::function<double&(Settings&)> ref;  // doubles
  std::function<int&(Settings&)> iref;    // ints
  double lo, hi;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"ode_rtol", "relative tolerance of the rkf78 integration for phi",
       [](Settings& s) -> double& { return s.det.trace.solver.ode_rtol; }, {}, 1e-16, 1e-3},
      {"ode_atol", "absolute tolerance of the rkf78 integration (scaled variables)",
       [](Settings& s) -> double& { return s.det.trace.solver.ode_atol; }, {}, 0.0, 1e-3},
      {"volterra_tol", "sup-norm increment at which the Neumann series for psi stops",
       [](Settings& s) -> double& { return s.det.trace.solver.volterra_tol; }, {}, 1e-16, 1e-3},
      {"volterra_max_iter", "iteration cap of the Neumann series", {},
       [](Settings& s) -> int& { return s.det.trace.solver.volterra_max_iter; }, 1, 10000},
      {"w_tail_tol", "kernel bound times int_X^inf |V|/x^2 required at X_max",
       [](Settings& s) -> double& { return s.det.trace.solver.w_tail_tol; }, {}, 1e-20, 1e-3},
      {"decay_decades", "(I/K)(mu X) / (I/K)(mu a) must reach 10^decay_decades at X_max",
       [](Settings& s) -> double& { return s.det.trace.solver.decay_decades; }, {}, 1.0, 300.0},
      {"x_cap", "X_max <= x_cap / mu", [](Settings& s) -> double& { return s.det.trace.solver.x_cap; }, {}, 1.0,
       1e8},
      {"panel_kappa", "panel width kappa x / sqrt(z^2 + mu^2 x^2)",
       [](Settings& s) -> double& { return s.det.trace.solver.panel_kappa; }, {}, 1e-3, 10.0},
      {"panel_h_max", "largest panel width", [](Settings& s) -> double& { return s.det.trace.solver.panel_h_max; },
       {}, 1e-3, 100.0},
      {"quad_tol", "relative tolerance of adaptive quadrature (traces, tails)",
       [](Settings& s) -> double& { return s.det.trace.quad_tol; }, {}, 1e-15, 1e-3},
      {"proximity", "relative Wronskian below which -z^2 counts as an eigenvalue",
       [](Settings& s) -> double& { return s.det.trace.proximity; }, {}, 0.0, 1e-2},
      {"det_proximity", "relative Wronskian below which the determinant is reported as 0",
       [](Settings& s) -> double& { return s.det.proximity; }, {}, 0.0, 1e-2},
      {"det_split_scale", "trace-integral split Z* = max(det_split_scale max(1, mu a), 10 max(mu, 1), 2 nu)",
       [](Settings& s) -> double& { return s.det.split_scale; }, {}, 1.0, 1e4},
      {"det_window_ratio", "tail fit window [Z*, det_window_ratio Z*]",
       [](Settings& s) -> double& { return s.det.window_ratio; }, {}, 2.0, 1e4},
      {"det_window_points", "samples in the tail fit window", {},
       [](Settings& s) -> int& { return s.det.window_points; }, 8, 10000},
      {"z_grid_points", "samples in the trace expansion fit grid", {},
       [](Settings& s) -> int& { return s.z_grid_points; }, 8, 10000},
      {"fd_resolution", "h sqrt(lambda_count) ceiling on the coarse FD grid",
       [](Settings& s) -> double& { return s.fd.resolution; }, {}, 1e-4, 1.0},
      {"fd_r_mu", "default FD truncation radius times mu", [](Settings& s) -> double& { return s.fd_r_mu; }, {},
       1.0, 1e6},
      {"fd_n", "default FD coarse intervals", {}, [](Settings& s) -> int& { return s.fd_n; }, 16, 10000000},
      {"compare_tol", "tolerance of the cross-method and LIM rows in `compare`",
       [](Settings& s) -> double& { return s.compare_tol; }, {}, 0.0, 1.0},
  };
  return f;
}

}  // namespace

std::vector<SettingEntry> settings_table(const Settings& s) {
  Settings copy = s;
  std::vector<SettingEntry> out;
  for (const Field& f : fields())
    out.push_back({f.name, f.ref ? f.ref(copy) : static_cast<double>(f.iref(copy)), f.description});
  return out;
}

void apply_setting(Settings& s, const std::string& name, double value) {
  for (const Field& f : fields()) {
    if (name != f.name) continue;
    if (!(value >= f.lo && value <= f.hi))
      throw DomainError("setting '" + name + "' must lie in [" + std::to_string(f.lo) + ", " +
                        std::to_string(f.hi) + "]");
    if (f.ref) {
      f.ref(s) = value;
    } else {
      if (value != std::floor(value)) throw DomainError("setting '" + name + "' must be an integer");
      f.iref(s) = static_cast<int>(value);
    }
    return;
  }
  throw DomainError("unknown setting '" + name + "'");
}

}  // namespace cuspdet
