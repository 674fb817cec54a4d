#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cuspdet/operator.hpp"
#include "cuspdet/regfit.hpp"
#include "cuspdet/trace.hpp"

/// Zeta-regularized determinants det(H + nu^2): the Wronskian formula and the
/// regularized trace integral, plus the checks that tie them together.
namespace cuspdet::detz {

enum class Method { wronskian, trace_integral, eig_product };
std::string to_string(Method m);

struct DetDiagnostics {
  double lim_constant = 0.0;  ///< constant term of the fitted tail expansion (trace integral)
  double fit_condition = 0.0;
  double fit_residual = 0.0;  ///< relative residual of the tail fit
  double tail_bound = 0.0;    ///< neglected-V bound summed over the trace samples
  double quad_part = 0.0;     ///< -2 int_nu^{Z*} z Tr dz
  double tail_part = 0.0;     ///< -2 (partie finie) int_{Z*}^inf
  double split = 0.0;         ///< Z*
  double relative_wronskian = 0.0;
  bool zero = false;          ///< the operator is (numerically) not invertible
};

struct DetResult {
  double value;
  double log_value;  ///< log |value|; -inf when zero
  Method method;
  Scaled wronskian_at_a;  ///< a^2 W(psi, phi)(a)
  DetDiagnostics diagnostics;
};

struct DetOptions {
  trace::TraceOptions trace;
  double proximity = 1e-10;   ///< relative Wronskian below which the determinant is 0
  double split_scale = 20.0;  ///< Z* = split_scale * max(1, mu a, nu)
  double window_ratio = 20.0; ///< tail fit on [Z*, window_ratio Z*]
  int window_points = 25;
  bool closed_forms = false;  ///< V = 0 only: use the Bessel closed forms for psi and phi
  std::optional<regfit::ExpansionBasis> tail_basis;  ///< default trace_integrand_basis()
};

/// sqrt(2/pi) a^2 W(psi_nu, phi_nu)(a). A vanishing Wronskian yields value 0 with diagnostics.zero.
DetResult detz_wronskian(const OperatorSpec& spec, const DetOptions& opt = {});

/// exp(-2 (partie finie) int_nu^inf z Tr(H + z^2)^{-1} dz).
DetResult detz_trace_integral(const OperatorSpec& spec, const DetOptions& opt = {});

/// {(0,1), (0,0), (-1,0), (-2,1), (-2,0), (-3,0), (-4,0)}: the trace basis times z, with two
/// more powers. The partie finie multiplies the growing-term coefficients by ~Z*, so the
/// truncation bias of a five-term fit shows up at the 1e-2 level in log det.
regfit::ExpansionBasis trace_integrand_basis();

/// log det(H + nu1^2) - log det(H + nu0^2) as the ordinary integral 2 int_{nu0}^{nu1} z Tr dz.
double log_ratio_trace(const OperatorSpec& spec, double nu0, double nu1, const DetOptions& opt = {});

/// log(a^2 W(psi_z, phi_z)(a)) at one z.
double log_wronskian(const OperatorSpec& spec, double z, const DetOptions& opt = {});

struct LimResult {
  double value;  ///< the constant term
  regfit::ExpansionModel model;
};

/// {(1,1), (1,0), (0,1), (0,0), (-1,0), (-2,0), (-3,0)}
regfit::ExpansionBasis lim_basis();

/// Regularized limit of log(a^2 W(psi_z, phi_z)(a)) as z -> inf, fitted on `z_grid`
/// (default: 25 geometric points on [20, 400] max(1, mu a)).
LimResult lim_log_wronskian(const OperatorSpec& spec, std::vector<double> z_grid = {},
                            const DetOptions& opt = {});

/// lambda_alpha = -a (alpha + psi'(a) / psi(a)) with psi = psi_nu; the Dirichlet boundary of
/// `spec` is ignored. Throws NumericalError when psi(a) = 0.
double dirichlet_neumann_ratio(const OperatorSpec& spec, double alpha, double nu,
                               const DetOptions& opt = {});

struct VariationCheck {
  double lhs;    ///< central difference of log detz_trace_integral
  double rhs;    ///< central difference of log(a^2 W)
  double green;  ///< int direction(x) G(x, x) dx at t = 0
};

/// Three routes to d/dt log det(H + t direction + nu^2) at t = 0.
VariationCheck variation_check(const OperatorSpec& spec, const Potential& direction,
                               double t_step = 1e-3, const DetOptions& opt = {});

struct FriedlanderCheck {
  double lhs;         ///< prod (1 + z / lambda_n) exp(tail)
  double rhs;         ///< det(H + z) / det(H) by the Wronskian formula
  double tail;        ///< the Weyl estimate of the omitted factors, in log
  double tail_error;
};

/// `eigs` are the lowest eigenvalues of H (ascending); the rest enter through
/// spectral::fredholm_tail.
FriedlanderCheck friedlander_check(const OperatorSpec& spec, double z, const std::vector<double>& eigs,
                                   const DetOptions& opt = {});

}  // namespace cuspdet::detz
