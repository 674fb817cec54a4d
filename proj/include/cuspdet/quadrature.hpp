#pragma once

#include <functional>
#include <vector>

namespace cuspdet::quad {

struct Result {
  double value;
  double error;
};

/// Globally adaptive Gauss-Kronrod (15/31) on [a, b]; b may be +infinity.
/// Throws NumericalError on non-finite values or when the error target is missed
/// by more than a factor 100.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, unsigned max_depth = 18);

/// Chebyshev-Lobatto rule on [-1, 1] with interpolation and cumulative integration.
class PanelRule {
 public:
  static constexpr int order = 17;
  static const PanelRule& get();

  const std::vector<double>& nodes() const { return t_; }
  const std::vector<double>& weights() const { return w_; }
  /// (R g)_j = integral from t_j to 1 of the interpolant of g.
  double right_cumulative(int j, const double* g) const;
  /// Barycentric interpolation at t in [-1, 1].
  double interpolate(const double* g, double t) const;

 private:
  PanelRule();
  std::vector<double> t_, w_, bary_;
  std::vector<double> rmat_;  // row-major order x order
};

/// Partition of [lo, hi] into panels, each mapped onto the PanelRule nodes.
struct PanelGrid {
  std::vector<double> edges;  ///< panel boundaries, edges.front() = lo, edges.back() = hi
  int panels() const { return static_cast<int>(edges.size()) - 1; }
  int size() const { return panels() * PanelRule::order; }
  /// Node coordinate of local index j in panel p.
  double node(int p, int j) const;
  /// Index of the panel containing x (clamped).
  int locate(double x) const;
  /// Integral of node values (size() entries).
  double integrate(const std::vector<double>& values) const;
  /// Interpolate node values at x.
  double interpolate(const std::vector<double>& values, double x) const;
};

/// Panel grid with widths min(h_max, kappa * local_scale(x)), growing from lo.
PanelGrid make_grid(double lo, double hi, const std::function<double(double)>& local_scale,
                    double h_max);

}  // namespace cuspdet::quad
