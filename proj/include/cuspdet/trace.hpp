#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cuspdet/operator.hpp"
#include "cuspdet/regfit.hpp"
#include "cuspdet/scaled.hpp"

/// Diagonal Green function and the resolvent trace Tr (H + z^2)^{-1}.
namespace cuspdet::trace {

struct TraceOptions {
  SolverOptions solver;
  double quad_tol = 1e-12;
  double proximity = 1e-10;  ///< relative Wronskian size below which -z^2 counts as an eigenvalue
};

class GreenDiag {
 public:
  /// `diagonal`, when given, evaluates G(x, x) directly (closed forms for V = 0).
  GreenDiag(Solution phi, Solution psi, Scaled wronskian_norm,
            std::function<double(double)> diagonal = {});

  /// G_z(x, x) = phi(x) psi(x) / (x^2 W(psi, phi)).
  double operator()(double x) const;
  /// G_z(x, y), symmetric.
  double kernel(double x, double y) const;
  double z() const { return phi_.z(); }
  /// The constant x^2 W(psi, phi).
  const Scaled& wronskian_norm() const { return w_; }
  const Solution& phi() const { return phi_; }
  const Solution& psi() const { return psi_; }

 private:
  Solution phi_, psi_;
  Scaled w_;
  std::function<double(double)> diagonal_;
};

/// Uses closed forms when V = 0 and the numerical constructions otherwise.
/// Throws EigenvalueProximity when the Wronskian is negligible against the boundary data.
GreenDiag green_diag(const OperatorSpec& spec, double z, const TraceOptions& opt = {});

struct TraceValue {
  double value;
  double quad_part;   ///< integral over [a, X] (the whole half line when V = 0)
  double tail_part;   ///< beyond X, where V is negligible
  double tail_bound;  ///< bound on what the V-free tail formula neglects
  double x_max;
};

TraceValue resolvent_trace_detail(const OperatorSpec& spec, double z, const TraceOptions& opt = {});
double resolvent_trace(const OperatorSpec& spec, double z, const TraceOptions& opt = {});

/// Tr(H + z^2)^{-1} = b0 z^{-1} log z + a0 z^{-1} + a1 z^{-2} + ...
struct TraceExpansion {
  double b0, a0, a1;
  regfit::ExpansionModel extra;
  std::pair<double, double> fit_window;
  std::vector<double> z;
  std::vector<double> trace;
};

/// {(-1,1), (-1,0), (-2,0), (-3,1), (-3,0)}
regfit::ExpansionBasis default_trace_basis();
/// 25 geometric points on [20, 400] * max(1, mu a).
std::vector<double> default_z_grid(const OperatorSpec& spec);

TraceExpansion fit_trace_expansion(const OperatorSpec& spec, const std::vector<double>& z_grid,
                                   const TraceOptions& opt = {},
                                   const std::optional<regfit::ExpansionBasis>& basis = {});

}  // namespace cuspdet::trace
