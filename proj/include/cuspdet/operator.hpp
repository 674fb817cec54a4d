#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cuspdet/potential.hpp"
#include "cuspdet/quadrature.hpp"
#include "cuspdet/scaled.hpp"

/// Fundamental systems for H = -(x^2 f')' + x^2 mu^2 - 1/4 + V on [a, infinity),
/// solving (H + z^2) f = 0.
namespace cuspdet {

/// R_a f = f'(a) + alpha f(a) = 0 (Neumann) or f(a) = 0 (Dirichlet).
/// The angle form uses alpha = cot(theta), theta in [0, pi), theta = 0 being Dirichlet.
struct BoundaryCondition {
  enum class Kind { dirichlet, neumann };
  Kind kind = Kind::dirichlet;
  double alpha = 0.0;

  static BoundaryCondition dirichlet() { return {}; }
  static BoundaryCondition neumann(double alpha) { return {Kind::neumann, alpha}; }
  static BoundaryCondition from_theta(double theta);
  double theta() const;
  bool is_dirichlet() const { return kind == Kind::dirichlet; }
};

struct OperatorSpec {
  double a = 1.0;
  double mu = 1.0;
  BoundaryCondition bc;
  Potential potential;
  double nu = 0.0;  ///< the shift: the operator is H + nu^2

  /// Throws SpecError naming the violated invariant.
  void validate() const;
};

enum class Normalization { at_left_endpoint, l2_at_infinity };
enum class Construction { closed_form_bessel, ode_forward, volterra_series, reduction_of_order };

std::string to_string(Normalization n);
std::string to_string(Construction c);

/// f(x) = f * e^{log_scale}, f'(x) = fp * e^{log_scale}.
struct ScaledEval {
  double f;
  double fp;
  double log_scale;
};

struct SolutionDiagnostics {
  double wronskian_drift = 0.0;
  int volterra_terms_used = 0;
  double tail_bound = 0.0;
  std::vector<double> increments;  ///< sup-norm of successive Neumann-series differences
  std::vector<double> envelope;    ///< (C |W|_1)^n / n! for the same n
  double kernel_bound = 0.0;       ///< max of the Volterra kernel scale y I K(mu y)
  double w_l1 = 0.0;               ///< integral of |V|/x^2 over the grid
  bool envelope_ok = true;
  int ode_steps = 0;
};

class Solution {
 public:
  Solution(std::function<ScaledEval(double)> eval, Normalization norm, Construction how, double z,
           std::pair<double, double> valid, SolutionDiagnostics diag = {});

  /// Throws DomainError outside the valid interval.
  ScaledEval eval_scaled(double x) const;
  /// (f(x), f'(x)); throws NumericalError if they leave the double range.
  std::pair<double, double> eval(double x) const;

  Normalization normalization() const { return norm_; }
  Construction construction() const { return how_; }
  double z() const { return z_; }
  std::pair<double, double> valid_interval() const { return valid_; }
  const SolutionDiagnostics& diagnostics() const { return diag_; }
  SolutionDiagnostics& diagnostics() { return diag_; }

 private:
  std::function<ScaledEval(double)> eval_;
  Normalization norm_;
  Construction how_;
  double z_;
  std::pair<double, double> valid_;
  SolutionDiagnostics diag_;
};

struct SolverOptions {
  double ode_rtol = 1e-12;
  double ode_atol = 1e-15;
  double volterra_tol = 1e-12;  ///< sup-norm increment at which the Neumann series stops
  int volterra_max_iter = 100;
  double w_tail_tol = 1e-14;    ///< required kernel_bound * integral of |W| beyond X_max
  double decay_decades = 16.0;  ///< I/K must grow by 10^decay_decades between a and X_max
  double x_cap = 1e3;           ///< X_max <= x_cap / mu
  double panel_kappa = 1.0;     ///< panel width kappa * x / sqrt(z^2 + mu^2 x^2)
  double panel_h_max = 0.5;
  std::optional<double> x_max;  ///< overrides the automatic rule
};

/// Smallest X on a geometric search with (I/K)(mu X) / (I/K)(mu a) >= 10^decay_decades
/// and kernel_bound * w_tail(X) < w_tail_tol. Throws TruncationError (carrying the
/// required X) above the cap.
double select_x_max(const OperatorSpec& spec, double z, const SolverOptions& opt = {});

/// Panel grid on [a, X_max] shared by the Volterra and ODE constructions.
quad::PanelGrid solution_grid(const OperatorSpec& spec, double z, double x_max,
                              const SolverOptions& opt = {});

/// Closed forms for V = 0.
Solution model_psi(double z, const OperatorSpec& spec);
Solution model_phi(double z, const OperatorSpec& spec);

/// phi for general V: forward integration of the scaled first-order system.
Solution solve_phi(const OperatorSpec& spec, double z, const SolverOptions& opt = {});
/// psi = x^{-1/2} K_z(mu x) (1 + f1) with f1 from the Neumann series of the Volterra equation.
Solution solve_psi(const OperatorSpec& spec, double z, const SolverOptions& opt = {});
/// Second solution h2 = h1 * integral_a^x (y h1)^{-2} dy, so that x^2 W(h1, h2) = 1.
Solution solve_h2(const OperatorSpec& spec, double z, const SolverOptions& opt = {});

/// x^2 (s1 s2' - s1' s2) at x, in scaled form and as a plain number.
Scaled wronskian_scaled(const Solution& s1, const Solution& s2, double x);
double wronskian(const Solution& s1, const Solution& s2, double x);

}  // namespace cuspdet
