#include "cuspdet/trace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cuspdet/bessel.hpp"
#include "cuspdet/errors.hpp"
#include "cuspdet/quadrature.hpp"

namespace cuspdet::trace {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double boundary_size(const ScaledEval& e, double a) {
  return std::hypot(e.f, a * e.fp);
}

}  // namespace

GreenDiag::GreenDiag(Solution phi, Solution psi, Scaled wronskian_norm,
                     std::function<double(double)> diagonal)
    : phi_(std::move(phi)), psi_(std::move(psi)), w_(wronskian_norm), diagonal_(std::move(diagonal)) {}

double GreenDiag::operator()(double x) const { return diagonal_ ? diagonal_(x) : kernel(x, x); }

double GreenDiag::kernel(double x, double y) const {
  const double lo = std::min(x, y), hi = std::max(x, y);
  const ScaledEval p = phi_.eval_scaled(lo), q = psi_.eval_scaled(hi);
  return p.f * q.f / w_.mantissa * std::exp(p.log_scale + q.log_scale - w_.exponent);
}

GreenDiag green_diag(const OperatorSpec& spec, double z, const TraceOptions& opt) {
  if (!(z >= 0.0)) throw DomainError("green_diag: z must be >= 0");
  const bool model = spec.potential.is_zero();
  Solution psi = model ? model_psi(z, spec) : solve_psi(spec, z, opt.solver);
  Solution phi = model ? model_phi(z, spec) : solve_phi(spec, z, opt.solver);
  const double a = spec.a;
  const Scaled w = wronskian_scaled(psi, phi, a);
  const ScaledEval ep = psi.eval_scaled(a), eh = phi.eval_scaled(a);
  // |x^2 W| against the size of the boundary data at a, both scaled the same way.
  const double ratio = std::abs(w.mantissa) / (a * a * boundary_size(ep, a) * boundary_size(eh, a)) *
                       std::exp(w.exponent - ep.log_scale - eh.log_scale);
  if (!(ratio >= opt.proximity))
    throw EigenvalueProximity("green_diag: -z^2 = " + num(-z * z) +
                              " is numerically an eigenvalue (relative Wronskian " + num(ratio) + ")");
  if (!model) return GreenDiag(std::move(phi), std::move(psi), w);

  // V = 0: G = x^{-1} I K(mu x) (A - B e^{-(rho(x) - rho(a))}) K(mu a) / (x^2 W), with I K
  // taken as one factor so that e^{+-mu x} never meet in a sum of logs.
  const double mu = spec.mu;
  const auto la = bessel::log_pair(z, mu * a);
  const double ra = la.log_i - la.log_k;
  double ca = 1.0, cb = 1.0;
  if (!spec.bc.is_dirichlet()) {
    ca = -a * (spec.bc.alpha - 0.5 / a + mu * la.dlog_k);
    cb = -a * (spec.bc.alpha - 0.5 / a + mu * la.dlog_i);
  }
  const bool dir = spec.bc.is_dirichlet();
  auto diagonal = [=](double x) {
    if (!(x >= a)) throw DomainError("green_diag: x below a");
    const auto lp = bessel::log_pair(z, mu * x);
    const double dr = (lp.log_i - lp.log_k) - ra;
    const double f = dir ? -std::expm1(-dr) : ca - cb * std::exp(-dr);
    return f / (x * w.mantissa) * std::exp(lp.log_ik + la.log_k - w.exponent);
  };
  return GreenDiag(std::move(phi), std::move(psi), w, diagonal);
}

TraceValue resolvent_trace_detail(const OperatorSpec& spec, double z, const TraceOptions& opt) {
  const GreenDiag g = green_diag(spec, z, opt);
  const double a = spec.a, mu = spec.mu;
  if (spec.potential.is_zero()) {
    // Boundary layer of width ~ a / z first, then x = x1 + L s with L the decay scale.
    const double zz = std::max(z, 1.0);
    const double x1 = a * (1.0 + 20.0 / zz);
    const double l = std::max(zz, mu * a) / mu;
    const double near = quad::integrate(g, a, x1, opt.quad_tol).value;
    const double far =
        quad::integrate([&](double s) { return l * g(x1 + l * s); }, 0.0, INFINITY, opt.quad_tol).value;
    return {near + far, near + far, 0.0, 0.0, INFINITY};
  }
  const double x_max = select_x_max(spec, z, opt.solver);
  const auto grid = solution_grid(spec, z, x_max, opt.solver);
  std::vector<double> vals(grid.size());
  for (int p = 0; p < grid.panels(); ++p)
    for (int j = 0; j < quad::PanelRule::order; ++j) {
      const double x = grid.node(p, j);
      vals[p * quad::PanelRule::order + j] = g(x);
    }
  const double body = grid.integrate(vals);

  // Beyond X, V ~ 0: G = x^{-1} (I K - c K^2) at argument mu x, with c fixed by G(X).
  const auto lx = bessel::log_pair(z, mu * x_max);
  const double ikx = std::exp(lx.log_ik);
  const double ck2 = ikx - x_max * g(x_max);
  const double t1 = quad::integrate(
                        [&](double x) {
                          const auto lp = bessel::log_pair(z, mu * x);
                          return std::exp(lp.log_ik) / x;
                        },
                        x_max, INFINITY, opt.quad_tol)
                        .value;
  const double t2 = quad::integrate(
                        [&](double x) {
                          const auto lp = bessel::log_pair(z, mu * x);
                          return std::exp(2.0 * (lp.log_k - lx.log_k)) / x;
                        },
                        x_max, INFINITY, opt.quad_tol)
                        .value;
  const double tail = t1 - ck2 * t2;
  // Dropped V beyond X: |delta G| <~ G * (kernel bound) * w_tail, integrated.
  const double tb = 2.0 / mu * spec.potential.w_tail(x_max) * std::abs(tail) +
                    g.psi().diagnostics().tail_bound * std::abs(body);
  return {body + tail, body, tail, tb, x_max};
}

double resolvent_trace(const OperatorSpec& spec, double z, const TraceOptions& opt) {
  return resolvent_trace_detail(spec, z, opt).value;
}

regfit::ExpansionBasis default_trace_basis() {
  return regfit::ExpansionBasis({{-1, 1}, {-1, 0}, {-2, 0}, {-3, 1}, {-3, 0}});
}

std::vector<double> default_z_grid(const OperatorSpec& spec) {
  const double s = std::max(1.0, spec.mu * spec.a);
  return regfit::geometric_grid(20.0 * s, 400.0 * s, 25);
}

TraceExpansion fit_trace_expansion(const OperatorSpec& spec, const std::vector<double>& z_grid,
                                   const TraceOptions& opt,
                                   const std::optional<regfit::ExpansionBasis>& basis) {
  if (z_grid.empty()) throw DomainError("fit_trace_expansion: empty z grid");
  const auto [lo, hi] = std::minmax_element(z_grid.begin(), z_grid.end());
  if (*lo < 10.0 * std::max(spec.mu, 1.0))
    throw DomainError("fit_trace_expansion: z grid must start at >= 10 max(mu, 1)");
  TraceExpansion out{0, 0, 0, regfit::ExpansionModel{basis.value_or(default_trace_basis()), {}, {}, {}, 0, 0, 0},
                     {*lo, *hi}, {}, {}};
  std::vector<regfit::Sample> samples;
  for (double z : z_grid) {
    const double t = resolvent_trace(spec, z, opt);
    out.z.push_back(z);
    out.trace.push_back(t);
    samples.push_back({z, t});
  }
  out.extra = regfit::fit_expansion(samples, out.extra.basis);
  out.b0 = out.extra.coeff(-1, 1);
  out.a0 = out.extra.coeff(-1, 0);
  out.a1 = out.extra.coeff(-2, 0);
  return out;
}

}  // namespace cuspdet::trace
