#include "cuspdet/operator.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

#include "cuspdet/bessel.hpp"
#include "cuspdet/errors.hpp"
#include "cuspdet/log.hpp"

namespace cuspdet {

namespace {

constexpr double kLn10 = 2.302585092994046;

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double rho(double z, double t) {
  const auto lp = bessel::log_pair(z, t);
  return lp.log_i - lp.log_k;
}

// WKB phase of the growing solution: S' = sqrt(z^2 + mu^2 x^2) / x.
double phase(double z, double mu, double x) {
  const double r = std::hypot(z, mu * x);
  return z > 0.0 ? r + z * std::log(mu * x / (z + r)) : r;
}

// Node values of the Volterra construction; shared by psi and h2.
struct VolterraState {
  double z = 0.0, mu = 1.0, a = 1.0, x_max = INFINITY;
  quad::PanelGrid grid;
  std::vector<double> f1, b;  // f1 and B(x) = integral_x^X F e^{-(rho(y)-rho(x))} dy
  std::vector<double> j;      // h2 / (x^{-1/2} I (1 + f1)), filled on demand
  double rho_a = 0.0, rho_x = 0.0, j_x = 0.0;
  bool zero = true;

  // f1, f1' at x (zero beyond X_max).
  std::pair<double, double> perturbation(double x, double ki) const {
    if (zero || x >= x_max) return {0.0, 0.0};
    const double f = grid.interpolate(f1, x);
    const double bb = grid.interpolate(b, x);
    return {f, -bb / (x * ki)};
  }
};

std::shared_ptr<VolterraState> build_volterra(const OperatorSpec& spec, double z,
                                              const SolverOptions& opt, SolutionDiagnostics& diag) {
  auto st = std::make_shared<VolterraState>();
  st->z = z;
  st->mu = spec.mu;
  st->a = spec.a;
  st->rho_a = rho(z, spec.mu * spec.a);
  if (spec.potential.is_zero()) return st;
  st->zero = false;
  st->x_max = select_x_max(spec, z, opt);
  st->grid = solution_grid(spec, z, st->x_max, opt);
  const auto& rule = quad::PanelRule::get();
  constexpr int m = quad::PanelRule::order;
  const int np = st->grid.panels();
  const int n = st->grid.size();

  std::vector<double> kiy(n), w(n), r(n), absw(n);
  double c = 0.0;
  for (int p = 0; p < np; ++p)
    for (int jj = 0; jj < m; ++jj) {
      const int i = p * m + jj;
      const double y = st->grid.node(p, jj);
      const auto lp = bessel::log_pair(z, spec.mu * y);
      kiy[i] = y * std::exp(lp.log_ik);
      r[i] = lp.log_i - lp.log_k;
      w[i] = spec.potential(y) / (y * y);
      absw[i] = std::abs(w[i]);
      c = std::max(c, kiy[i]);
    }
  if (!(c <= 2.0 / spec.mu * (1.0 + 1e-6)))
    throw NumericalError("solve_psi: internal error, Volterra kernel bound " + num(c) +
                         " exceeds 2/mu");
  const double wl1 = st->grid.integrate(absw);
  diag.kernel_bound = c;
  diag.w_l1 = wl1;

  // Neumann series on differences: delta_0 = 1, delta_{n+1} = L W delta_n.
  st->f1.assign(n, 0.0);
  st->b.assign(n, 0.0);
  std::vector<double> delta(n, 1.0), next(n), nb(n), fv(m), gv(m);
  double envelope = 1.0;
  bool converged = false;
  for (int it = 1; it <= opt.volterra_max_iter; ++it) {
    double a_r = 0.0, b_r = 0.0;
    for (int p = np - 1; p >= 0; --p) {
      const int base = p * m;
      const double h2 = 0.5 * (st->grid.edges[p + 1] - st->grid.edges[p]);
      const double rr = r[base + m - 1];
      for (int jj = 0; jj < m; ++jj) {
        const int i = base + jj;
        fv[jj] = kiy[i] * w[i] * delta[i];
        gv[jj] = fv[jj] * std::exp(-(r[i] - rr));
      }
      for (int jj = 0; jj < m; ++jj) {
        const int i = base + jj;
        const double aj = h2 * rule.right_cumulative(jj, fv.data()) + a_r;
        const double bj = std::exp(-(rr - r[i])) * (h2 * rule.right_cumulative(jj, gv.data()) + b_r);
        next[i] = aj - bj;
        nb[i] = bj;
      }
      a_r = h2 * rule.right_cumulative(0, fv.data()) + a_r;
      b_r = nb[base];
    }
    double inc = 0.0;
    for (int i = 0; i < n; ++i) {
      st->f1[i] += next[i];
      st->b[i] += nb[i];
      inc = std::max(inc, std::abs(next[i]));
    }
    envelope *= c * wl1 / it;
    diag.increments.push_back(inc);
    diag.envelope.push_back(envelope);
    if (inc > 1.01 * envelope + 1e-15) {
      diag.envelope_ok = false;
      logger()->warn("solve_psi: increment {} above factorial envelope {} at n = {}", inc, envelope, it);
    }
    diag.volterra_terms_used = it;
    delta.swap(next);
    if (inc < opt.volterra_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("solve_psi: Neumann series did not reach " + num(opt.volterra_tol) +
                         " in " + std::to_string(opt.volterra_max_iter) + " iterations");
  double fsup = 0.0;
  for (double v : st->f1) fsup = std::max(fsup, std::abs(v));
  diag.tail_bound = c * spec.potential.w_tail(st->x_max) * (1.0 + fsup) + opt.volterra_tol;
  logger()->debug("solve_psi: z = {}, X = {}, {} nodes, {} terms, |W|_1 = {}", z, st->x_max, n,
                  diag.volterra_terms_used, wl1);
  return st;
}

void fill_h2(VolterraState& st) {
  if (st.zero) return;
  if (!st.j.empty()) return;
  const auto& rule = quad::PanelRule::get();
  constexpr int m = quad::PanelRule::order;
  const int np = st.grid.panels();
  double fsup = 0.0;
  for (double v : st.f1) fsup = std::max(fsup, std::abs(v));
  if (!(fsup < 1.0))
    throw NumericalError("solve_h2: sup |f1| = " + num(fsup) + " >= 1, h1 may vanish");
  std::vector<double> r(st.grid.size()), u(m);
  for (int p = 0; p < np; ++p)
    for (int jj = 0; jj < m; ++jj) r[p * m + jj] = rho(st.z, st.mu * st.grid.node(p, jj));
  st.j.assign(st.grid.size(), 0.0);
  double j_l = 0.0;
  for (int p = 0; p < np; ++p) {
    const int base = p * m;
    const double h2 = 0.5 * (st.grid.edges[p + 1] - st.grid.edges[p]);
    const double rl = r[base], rr = r[base + m - 1];
    for (int jj = 0; jj < m; ++jj) {
      const int i = base + jj;
      const double x = st.grid.node(p, jj);
      const auto lp = bessel::log_pair(st.z, st.mu * x);
      const double rp = 1.0 / (x * std::exp(lp.log_ik));
      const double g = 1.0 + st.f1[i];
      u[jj] = rp * std::exp(r[i] - rr) / (g * g);
    }
    const double total = rule.right_cumulative(0, u.data());
    for (int jj = 0; jj < m; ++jj) {
      const int i = base + jj;
      st.j[i] = std::exp(-(r[i] - rl)) * j_l +
                std::exp(rr - r[i]) * h2 * (total - rule.right_cumulative(jj, u.data()));
    }
    j_l = st.j[base + m - 1];
  }
  st.rho_x = r.back();
  st.j_x = st.j.back();
}

using State = std::array<double, 2>;

struct ScaledSystem {
  double z, mu;
  const Potential* v;
  void operator()(const State& s, State& d, double x) const {
    const double sp = std::hypot(z, mu * x) / x;
    const double q = mu * mu * x * x - 0.25 + (*v)(x) + z * z;
    d[0] = s[1] / (x * x) - sp * s[0];
    d[1] = q * s[0] - sp * s[1];
  }
};

}  // namespace

BoundaryCondition BoundaryCondition::from_theta(double theta) {
  if (!(theta >= 0.0 && theta < std::numbers::pi))
    throw SpecError("boundary condition: theta must lie in [0, pi)");
  if (theta == 0.0) return dirichlet();
  return neumann(std::cos(theta) / std::sin(theta));
}

double BoundaryCondition::theta() const {
  if (is_dirichlet()) return 0.0;
  const double t = std::atan2(1.0, alpha);  // cot(t) = alpha, t in (0, pi)
  return t;
}

void OperatorSpec::validate() const {
  if (!(std::isfinite(a) && a > 0.0)) throw SpecError("spec: a must be > 0 (got " + num(a) + ")");
  if (!(std::isfinite(mu) && mu > 0.0)) throw SpecError("spec: mu must be > 0 (got " + num(mu) + ")");
  if (!(std::isfinite(nu) && nu >= 0.0)) throw SpecError("spec: nu must be >= 0 (got " + num(nu) + ")");
  if (bc.kind == BoundaryCondition::Kind::neumann && !std::isfinite(bc.alpha))
    throw SpecError("spec: Neumann alpha must be finite");
  potential.validate(a);
}

std::string to_string(Normalization n) {
  return n == Normalization::at_left_endpoint ? "at_left_endpoint" : "l2_at_infinity";
}

std::string to_string(Construction c) {
  switch (c) {
    case Construction::closed_form_bessel: return "closed_form_bessel";
    case Construction::ode_forward: return "ode_forward";
    case Construction::volterra_series: return "volterra_series";
    case Construction::reduction_of_order: return "reduction_of_order";
  }
  return "?";
}

Solution::Solution(std::function<ScaledEval(double)> eval, Normalization norm, Construction how,
                   double z, std::pair<double, double> valid, SolutionDiagnostics diag)
    : eval_(std::move(eval)), norm_(norm), how_(how), z_(z), valid_(valid), diag_(std::move(diag)) {}

ScaledEval Solution::eval_scaled(double x) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(valid_.second == INFINITY ? x : valid_.second));
  if (!(x >= valid_.first - tol && x <= valid_.second + tol))
    throw DomainError("solution: x = " + num(x) + " outside valid interval [" + num(valid_.first) +
                      ", " + num(valid_.second) + "]");
  return eval_(std::clamp(x, valid_.first, valid_.second));
}

std::pair<double, double> Solution::eval(double x) const {
  const ScaledEval e = eval_scaled(x);
  const double s = std::exp(e.log_scale);
  const double f = e.f * s, fp = e.fp * s;
  if (!std::isfinite(f) || !std::isfinite(fp) || (s == 0.0 && (e.f != 0.0 || e.fp != 0.0)))
    throw NumericalError("solution value at x = " + num(x) + " outside double range; use eval_scaled");
  return {f, fp};
}

double select_x_max(const OperatorSpec& spec, double z, const SolverOptions& opt) {
  if (opt.x_max) {
    if (!(*opt.x_max > spec.a)) throw DomainError("x_max must exceed a");
    return *opt.x_max;
  }
  const double target = opt.decay_decades * kLn10;
  const double ra = rho(z, spec.mu * spec.a);
  const double c = 1.0 / spec.mu;  // bound for y I K(mu y)
  const double cap = spec.a + opt.x_cap / spec.mu;
  auto ok = [&](double x) {
    return rho(z, spec.mu * x) - ra >= target &&
           (spec.potential.is_zero() || c * spec.potential.w_tail(x) < opt.w_tail_tol);
  };
  double x = spec.a + 0.5 / spec.mu;
  double step = 0.05 * spec.a + 0.5 / spec.mu;
  while (!ok(x)) {
    x += step;
    step *= 1.2;
    if (x > 1e12 * std::max(1.0, cap)) break;
  }
  if (x > cap)
    throw TruncationError("X_max: tail not certified below the cap " + num(cap) + "; required X_max " +
                              num(x),
                          x);
  return x;
}

quad::PanelGrid solution_grid(const OperatorSpec& spec, double z, double x_max,
                              const SolverOptions& opt) {
  const double mu = spec.mu, k = opt.panel_kappa;
  return quad::make_grid(
      spec.a, x_max, [=](double x) { return k * x / std::hypot(z, mu * x); }, opt.panel_h_max);
}

Solution model_psi(double z, const OperatorSpec& spec) {
  if (!spec.potential.is_zero()) throw DomainError("model_psi: potential must be zero");
  if (!(z >= 0.0)) throw DomainError("model_psi: z must be >= 0");
  const double mu = spec.mu;
  auto eval = [=](double x) {
    const auto lp = bessel::log_pair(z, mu * x);
    return ScaledEval{1.0, -0.5 / x + mu * lp.dlog_k, lp.log_k - 0.5 * std::log(x)};
  };
  return Solution(eval, Normalization::l2_at_infinity, Construction::closed_form_bessel, z,
                  {spec.a, INFINITY});
}

Solution model_phi(double z, const OperatorSpec& spec) {
  if (!spec.potential.is_zero()) throw DomainError("model_phi: potential must be zero");
  if (!(z >= 0.0)) throw DomainError("model_phi: z must be >= 0");
  const double mu = spec.mu, a = spec.a;
  const auto la = bessel::log_pair(z, mu * a);
  const double ra = la.log_i - la.log_k;
  double ca = 1.0, cb = 1.0;
  if (!spec.bc.is_dirichlet()) {
    const double alpha = spec.bc.alpha;
    const double nk = alpha - 0.5 / a + mu * la.dlog_k;
    const double ni = alpha - 0.5 / a + mu * la.dlog_i;
    if (std::abs(a * nk) <= 1e-14 * (std::abs(alpha) * a + 0.5 + mu * a * std::abs(la.dlog_k)))
      throw EigenvalueProximity("model_phi: Neumann data (alpha - 1/(2a)) K + mu K' vanishes; -z^2 = " +
                                num(-z * z) + " is an eigenvalue");
    ca = -a * nk;
    cb = -a * ni;
  }
  const bool dir = spec.bc.is_dirichlet();
  auto eval = [=](double x) {
    const auto lp = bessel::log_pair(z, mu * x);
    const double dr = (lp.log_i - lp.log_k) - ra;
    const double e = std::exp(-dr);
    const double di = -0.5 / x + mu * lp.dlog_i;
    const double dk = -0.5 / x + mu * lp.dlog_k;
    const double f = dir ? -std::expm1(-dr) : ca - cb * e;
    return ScaledEval{f, ca * di - cb * e * dk, la.log_k + lp.log_i - 0.5 * std::log(x)};
  };
  return Solution(eval, Normalization::at_left_endpoint, Construction::closed_form_bessel, z,
                  {a, INFINITY});
}

Solution solve_phi(const OperatorSpec& spec, double z, const SolverOptions& opt) {
  namespace ode = boost::numeric::odeint;
  if (!(z >= 0.0)) throw DomainError("solve_phi: z must be >= 0");
  const double a = spec.a, mu = spec.mu;
  const double x_max = select_x_max(spec, z, opt);
  const auto grid = solution_grid(spec, z, x_max, opt);

  std::vector<double> xs;
  xs.reserve(grid.size());
  for (int p = 0; p < grid.panels(); ++p)
    for (int j = (p == 0 ? 0 : 1); j < quad::PanelRule::order; ++j) xs.push_back(grid.node(p, j));

  auto data = std::make_shared<std::vector<State>>();
  data->reserve(xs.size());
  State s0 = spec.bc.is_dirichlet() ? State{0.0, std::sqrt(a)}
                                    : State{1.0 / std::sqrt(a), -spec.bc.alpha * a * std::sqrt(a)};
  auto pot = std::make_shared<Potential>(spec.potential);
  auto psys = std::make_shared<ScaledSystem>(ScaledSystem{z, mu, pot.get()});

  SolutionDiagnostics diag;
  double last = a;
  try {
    auto stepper = ode::make_controlled(opt.ode_atol, opt.ode_rtol, ode::runge_kutta_fehlberg78<State>());
    State s = s0;
    const double dt0 = 0.1 * std::min(grid.edges[1] - a, 1.0);
    diag.ode_steps = static_cast<int>(ode::integrate_times(
        stepper, std::ref(*psys), s, xs.begin(), xs.end(), dt0, [&](const State& st, double x) {
          data->push_back(st);
          last = x;
        }));
  } catch (const std::exception& e) {
    throw NumericalError("solve_phi: integration failed after x = " + num(last) + ": " + e.what());
  }
  if (data->size() != xs.size()) throw NumericalError("solve_phi: integration stopped at x = " + num(last));
  for (const State& st : *data)
    if (!std::isfinite(st[0]) || !std::isfinite(st[1]))
      throw NumericalError("solve_phi: non-finite state");

  auto nodes = std::make_shared<std::vector<double>>(std::move(xs));
  const double sa = phase(z, mu, a);
  const double atol = opt.ode_atol, rtol = opt.ode_rtol;
  auto eval = [=, keep = pot](double x) {
    auto it = std::upper_bound(nodes->begin(), nodes->end(), x);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - nodes->begin(), 1) - 1);
    State st = (*data)[i];
    const double x0 = (*nodes)[i];
    if (x != x0) {
      try {
        auto stepper = ode::make_controlled(atol, rtol, ode::runge_kutta_fehlberg78<State>());
        ode::integrate_adaptive(stepper, std::ref(*psys), st, x0, x, 0.25 * (x - x0));
      } catch (const std::exception& e) {
        throw NumericalError("solve_phi: evaluation at x = " + num(x) + " failed: " + e.what());
      }
    }
    return ScaledEval{st[0], st[1] / (x * x), phase(z, mu, x) - sa};
  };
  return Solution(eval, Normalization::at_left_endpoint, Construction::ode_forward, z, {a, x_max}, diag);
}

Solution solve_psi(const OperatorSpec& spec, double z, const SolverOptions& opt) {
  if (!(z >= 0.0)) throw DomainError("solve_psi: z must be >= 0");
  SolutionDiagnostics diag;
  auto st = build_volterra(spec, z, opt, diag);
  const double mu = spec.mu;
  auto eval = [st, mu, z](double x) {
    const auto lp = bessel::log_pair(z, mu * x);
    const auto [f, fp] = st->perturbation(x, std::exp(lp.log_ik));
    const double dk = -0.5 / x + mu * lp.dlog_k;
    return ScaledEval{1.0 + f, dk * (1.0 + f) + fp, lp.log_k - 0.5 * std::log(x)};
  };
  return Solution(eval, Normalization::l2_at_infinity, Construction::volterra_series, z,
                  {spec.a, INFINITY}, diag);
}

Solution solve_h2(const OperatorSpec& spec, double z, const SolverOptions& opt) {
  if (!(z >= 0.0)) throw DomainError("solve_h2: z must be >= 0");
  SolutionDiagnostics diag;
  auto st = build_volterra(spec, z, opt, diag);
  fill_h2(*st);
  const double mu = spec.mu;
  auto eval = [st, mu, z](double x) {
    const auto lp = bessel::log_pair(z, mu * x);
    const double ki = std::exp(lp.log_ik);
    const auto [f, fp] = st->perturbation(x, ki);
    double j;
    if (st->zero) {
      j = -std::expm1(-((lp.log_i - lp.log_k) - st->rho_a));
    } else if (x >= st->x_max) {
      const double e = std::exp(-((lp.log_i - lp.log_k) - st->rho_x));
      j = e * st->j_x - std::expm1(-((lp.log_i - lp.log_k) - st->rho_x));
    } else {
      j = st->grid.interpolate(st->j, x);
    }
    const double g = 1.0 + f;
    const double dk = -0.5 / x + mu * lp.dlog_k;
    return ScaledEval{g * j, (dk * g + fp) * j + 1.0 / (x * ki * g), lp.log_i - 0.5 * std::log(x)};
  };
  return Solution(eval, Normalization::at_left_endpoint, Construction::reduction_of_order, z,
                  {spec.a, INFINITY}, diag);
}

Scaled wronskian_scaled(const Solution& s1, const Solution& s2, double x) {
  if (std::abs(s1.z() - s2.z()) > 1e-14 * std::max(1.0, std::abs(s1.z())))
    throw DomainError("wronskian: solutions belong to different z");
  const auto [lo1, hi1] = s1.valid_interval();
  const auto [lo2, hi2] = s2.valid_interval();
  const double lo = std::max(lo1, lo2), hi = std::min(hi1, hi2);
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  if (x < lo - tol || x > hi + tol)
    throw DomainError("wronskian: x = " + num(x) + " outside the common valid interval");
  const ScaledEval e1 = s1.eval_scaled(x), e2 = s2.eval_scaled(x);
  return Scaled{x * x * (e1.f * e2.fp - e1.fp * e2.f), e1.log_scale + e2.log_scale};
}

double wronskian(const Solution& s1, const Solution& s2, double x) {
  const Scaled w = wronskian_scaled(s1, s2, x);
  const double v = w.value();
  if (!std::isfinite(v) || (v == 0.0 && w.mantissa != 0.0))
    throw NumericalError("wronskian outside double range; use wronskian_scaled");
  return v;
}

}  // namespace cuspdet
