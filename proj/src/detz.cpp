#include "cuspdet/detz.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <spdlog/spdlog.h>
#include <numbers>

#include "cuspdet/errors.hpp"
#include "cuspdet/log.hpp"
#include "cuspdet/quadrature.hpp"
#include "cuspdet/spectral.hpp"

namespace cuspdet::detz {

namespace {

const double kLogPrefactor = 0.5 * std::log(2.0 / std::numbers::pi);

double boundary_size(const ScaledEval& e, double a) { return std::hypot(e.f, a * e.fp); }

struct Pair {
  Solution psi, phi;
};

Pair solutions(const OperatorSpec& spec, double z, const DetOptions& opt) {
  if (opt.closed_forms) {
    if (!spec.potential.is_zero()) throw SpecError("detz: closed forms need V = 0");
    return {model_psi(z, spec), model_phi(z, spec)};
  }
  return {solve_psi(spec, z, opt.trace.solver), solve_phi(spec, z, opt.trace.solver)};
}

// Fixed Gauss-Legendre panels, doubling from `lo`: smooth in the operator, so finite
// differences in a potential parameter see no adaptive-mesh noise.
double panel_integral(const std::function<double(double)>& f, double lo, double hi) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  if (hi == lo) return 0.0;
  if (hi < lo) return -panel_integral(f, hi, lo);
  double s = 0.0;
  for (double l = lo; l < hi;) {
    double r = std::max(2.0 * l, l + 1.0);
    if (r > hi || r > hi - 0.25 * (r - l)) r = hi;
    s += rule::integrate(f, l, r);
    l = r;
  }
  return s;
}

// z Tr(H + z^2)^{-1}
std::function<double(double)> integrand(const OperatorSpec& spec, const DetOptions& opt,
                                        double* tail_bound = nullptr) {
  return [&spec, &opt, tail_bound](double z) {
    const auto t = trace::resolvent_trace_detail(spec, z, opt.trace);
    if (tail_bound) *tail_bound = std::max(*tail_bound, t.tail_bound);
    return z * t.value;
  };
}

OperatorSpec shifted(const OperatorSpec& spec, const Potential& dir, double t) {
  OperatorSpec s = spec;
  s.potential = spec.potential.plus(dir, t);
  return s;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::wronskian: return "wronskian";
    case Method::trace_integral: return "trace_integral";
    case Method::eig_product: return "eig_product";
  }
  return "?";
}

DetResult detz_wronskian(const OperatorSpec& spec, const DetOptions& opt) {
  spec.validate();
  const double a = spec.a, nu = spec.nu;
  const Pair p = solutions(spec, nu, opt);
  const Scaled w = wronskian_scaled(p.psi, p.phi, a);
  const ScaledEval ep = p.psi.eval_scaled(a), eh = p.phi.eval_scaled(a);
  DetResult r{0.0, -INFINITY, Method::wronskian, w, {}};
  const double rel = std::abs(w.mantissa) / (a * a * boundary_size(ep, a) * boundary_size(eh, a)) *
                     std::exp(w.exponent - ep.log_scale - eh.log_scale);
  r.diagnostics.relative_wronskian = rel;
  if (!(rel >= opt.proximity)) {
    logger()->warn("detz_wronskian: Wronskian vanishes at nu = {} (relative {:.3e}); det = 0", nu, rel);
    r.diagnostics.zero = true;
    return r;
  }
  r.log_value = kLogPrefactor + w.log_abs();
  r.value = w.sign() * std::exp(r.log_value);
  return r;
}

regfit::ExpansionBasis trace_integrand_basis() {
  return regfit::ExpansionBasis({{0, 1}, {0, 0}, {-1, 0}, {-2, 1}, {-2, 0}, {-3, 0}, {-4, 0}});
}

DetResult detz_trace_integral(const OperatorSpec& spec, const DetOptions& opt) {
  spec.validate();
  const double nu = spec.nu, mu = spec.mu;
  // Z* clears both the fit floor of the trace expansion and nu.
  const double split = std::max({opt.split_scale * std::max(1.0, mu * spec.a),
                                 10.0 * std::max(mu, 1.0), 2.0 * nu});
  double tb = 0.0;
  const auto g = integrand(spec, opt, &tb);
  const double body = panel_integral(g, nu, split);

  std::vector<regfit::Sample> samples;
  for (double z : regfit::geometric_grid(split, opt.window_ratio * split, opt.window_points))
    samples.push_back({z, g(z)});
  const auto model = regfit::fit_expansion(samples, opt.tail_basis.value_or(trace_integrand_basis()));
  const double tail = regfit::regularized_tail(model, split);

  DetResult r{0.0, -2.0 * (body + tail), Method::trace_integral, {NAN, 0.0}, {}};
  r.value = std::exp(r.log_value);
  auto& d = r.diagnostics;
  d.lim_constant = model.coeff(0, 0);
  d.fit_condition = model.condition_number;
  d.fit_residual = model.relative_residual;
  d.tail_bound = 2.0 * tb * opt.window_ratio * split;
  d.quad_part = -2.0 * body;
  d.tail_part = -2.0 * tail;
  d.split = split;
  logger()->debug("detz_trace_integral: body {:.12g} tail {:.12g} cond {:.3g} resid {:.3g}", body,
                  tail, model.condition_number, model.relative_residual);
  return r;
}

double log_ratio_trace(const OperatorSpec& spec, double nu0, double nu1, const DetOptions& opt) {
  if (!(nu0 >= 0.0 && nu1 >= 0.0)) throw DomainError("log_ratio_trace: shifts must be >= 0");
  spec.validate();
  return 2.0 * panel_integral(integrand(spec, opt), nu0, nu1);
}

double log_wronskian(const OperatorSpec& spec, double z, const DetOptions& opt) {
  const Pair p = solutions(spec, z, opt);
  return wronskian_scaled(p.psi, p.phi, spec.a).log_abs();
}

regfit::ExpansionBasis lim_basis() {
  return regfit::ExpansionBasis({{1, 1}, {1, 0}, {0, 1}, {0, 0}, {-1, 0}, {-2, 0}, {-3, 0}});
}

LimResult lim_log_wronskian(const OperatorSpec& spec, std::vector<double> z_grid, const DetOptions& opt) {
  spec.validate();
  if (z_grid.empty()) z_grid = trace::default_z_grid(spec);
  std::vector<regfit::Sample> samples;
  for (double z : z_grid) samples.push_back({z, log_wronskian(spec, z, opt)});
  auto model = regfit::fit_expansion(samples, lim_basis());
  return {regfit::reg_lim(model), std::move(model)};
}

double dirichlet_neumann_ratio(const OperatorSpec& spec, double alpha, double nu, const DetOptions& opt) {
  const double a = spec.a;
  const Solution psi =
      opt.closed_forms ? model_psi(nu, spec) : solve_psi(spec, nu, opt.trace.solver);
  const ScaledEval e = psi.eval_scaled(a);
  if (e.f == 0.0) throw NumericalError("dirichlet_neumann_ratio: psi(a) = 0, lambda_alpha undefined");
  return -a * (alpha + e.fp / e.f);
}

VariationCheck variation_check(const OperatorSpec& spec, const Potential& direction, double t_step,
                               const DetOptions& opt) {
  if (!(t_step > 0.0)) throw DomainError("variation_check: t_step must be > 0");
  if (direction.is_zero()) return {0.0, 0.0, 0.0};
  const OperatorSpec up = shifted(spec, direction, t_step), down = shifted(spec, direction, -t_step);
  up.validate();
  down.validate();
  const double h2 = 2.0 * t_step;
  const double lhs = (detz_trace_integral(up, opt).log_value - detz_trace_integral(down, opt).log_value) / h2;
  const double rhs = (log_wronskian(up, spec.nu, opt) - log_wronskian(down, spec.nu, opt)) / h2;

  const auto g = trace::green_diag(spec, spec.nu, opt.trace);
  const double end = std::min(g.phi().valid_interval().second, g.psi().valid_interval().second);
  const double green =
      quad::integrate([&](double x) { return direction(x) * g(x); }, spec.a, end, opt.trace.quad_tol).value;
  return {lhs, rhs, green};
}

FriedlanderCheck friedlander_check(const OperatorSpec& spec, double z, const std::vector<double>& eigs,
                                   const DetOptions& opt) {
  if (!(z >= 0.0)) throw DomainError("friedlander_check: z must be >= 0");
  if (eigs.empty()) throw DomainError("friedlander_check: no eigenvalues");
  if (z == 0.0) return {1.0, 1.0, 0.0, 0.0};
  double lp = 0.0;
  for (double l : eigs) {
    if (!(l > 0.0)) throw DomainError("friedlander_check: eigenvalues must be positive");
    lp += std::log1p(z / l);
  }
  const auto tail = spectral::fredholm_tail(eigs, z, eigs.back(), spec.mu * spec.a);
  OperatorSpec s0 = spec, s1 = spec;
  s0.nu = 0.0;
  s1.nu = std::sqrt(z);
  const double rhs = std::exp(detz_wronskian(s1, opt).log_value - detz_wronskian(s0, opt).log_value);
  return {std::exp(lp + tail.value), rhs, tail.value, tail.error};
}

}  // namespace cuspdet::detz
