#include "cuspdet/potential.hpp"

#include <algorithm>
#include <cmath>

#include "cuspdet/errors.hpp"
#include "cuspdet/quadrature.hpp"

namespace cuspdet {

namespace {

enum class Preset { sqrt_exp, exp, inverse_power };

double param(const std::map<std::string, double>& p, const std::string& key, const std::string& preset) {
  const auto it = p.find(key);
  if (it == p.end()) throw SpecError("potential '" + preset + "': missing parameter '" + key + "'");
  if (!std::isfinite(it->second))
    throw SpecError("potential '" + preset + "': parameter '" + key + "' is not finite");
  return it->second;
}

}  // namespace

struct Potential::Impl {
  Form form = Form::zero;
  Preset preset_id = Preset::sqrt_exp;
  std::string preset;
  std::map<std::string, double> params;
  double c = 0.0, rate = 0.0, p = 0.0;
  std::vector<double> x, v, m;  // m: spline second derivatives
  int order = 3;
  double gamma = 0.0;
  std::vector<std::pair<double, Potential>> parts;

  double eval(double t) const {
    switch (form) {
      case Form::zero: return 0.0;
      case Form::analytic:
        switch (preset_id) {
          case Preset::sqrt_exp: return c * std::sqrt(t) * std::exp(-rate * t);
          case Preset::exp: return c * std::exp(-rate * t);
          case Preset::inverse_power: return c * std::pow(t, -p);
        }
        return 0.0;
      case Form::tabulated: {
        if (t < x.front() || t > x.back()) return 0.0;
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin(), 1) - 1, x.size() - 2);
        const double h = x[i + 1] - x[i];
        const double A = (x[i + 1] - t) / h, B = (t - x[i]) / h;
        double s = A * v[i] + B * v[i + 1];
        if (order == 3) s += ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
        return s;
      }
      case Form::sum: {
        double s = 0.0;
        for (const auto& [w, pot] : parts) s += w * pot(t);
        return s;
      }
    }
    return 0.0;
  }
};

Potential::Potential() : impl_(std::make_shared<Impl>()) {}

Potential Potential::analytic(const std::string& preset, std::map<std::string, double> params,
                              std::optional<double> gamma) {
  auto im = std::make_shared<Impl>();
  im->form = Form::analytic;
  im->preset = preset;
  if (preset == "sqrt_exp") {
    im->preset_id = Preset::sqrt_exp;
    im->c = param(params, "c", preset);
    im->rate = param(params, "rate", preset);
    if (!(im->rate > 0.0)) throw SpecError("potential 'sqrt_exp': rate must be > 0");
    im->gamma = gamma.value_or(0.5);
  } else if (preset == "exp") {
    im->preset_id = Preset::exp;
    im->c = param(params, "c", preset);
    im->rate = param(params, "rate", preset);
    if (!(im->rate > 0.0)) throw SpecError("potential 'exp': rate must be > 0");
    im->gamma = gamma.value_or(0.0);
  } else if (preset == "inverse_power") {
    im->preset_id = Preset::inverse_power;
    im->c = param(params, "c", preset);
    im->p = param(params, "p", preset);
    // V in x^gamma L^1 needs gamma + p > 1.
    im->gamma = gamma.value_or(std::clamp(1.5 - im->p, 0.0, 1.9));
  } else {
    throw SpecError("potential: unknown analytic preset '" + preset + "'");
  }
  im->params = std::move(params);
  Potential out;
  out.impl_ = std::move(im);
  return out;
}

Potential Potential::sqrt_exp(double c, double rate) { return analytic("sqrt_exp", {{"c", c}, {"rate", rate}}); }
Potential Potential::exp_decay(double c, double rate) { return analytic("exp", {{"c", c}, {"rate", rate}}); }
Potential Potential::inverse_power(double c, double p) { return analytic("inverse_power", {{"c", c}, {"p", p}}); }

Potential Potential::tabulated(std::vector<double> x, std::vector<double> v, int order,
                               std::optional<double> gamma) {
  if (x.size() != v.size()) throw SpecError("tabulated potential: x and V lengths differ");
  if (x.size() < 2) throw SpecError("tabulated potential: need at least two grid points");
  if (order != 1 && order != 3) throw SpecError("tabulated potential: interpolation order must be 1 or 3");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(v[i]))
      throw SpecError("tabulated potential: non-finite grid entry");
    if (i > 0 && !(x[i] > x[i - 1])) throw SpecError("tabulated potential: grid must be strictly increasing");
  }
  auto im = std::make_shared<Impl>();
  im->form = Form::tabulated;
  im->order = order;
  im->gamma = gamma.value_or(0.0);
  const std::size_t n = x.size();
  im->m.assign(n, 0.0);
  if (order == 3 && n > 2) {
    // Natural spline: tridiagonal system for the interior second derivatives.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      diag[i] = (h0 + h1) / 3.0;
      upper[i] = h1 / 6.0;
      rhs[i] = (v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0;
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = (x[i] - x[i - 1]) / 6.0;
      const double f = lower / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      im->m[i] = (rhs[i] - upper[i] * im->m[i + 1]) / diag[i];
      if (i == 1) break;
    }
  }
  im->x = std::move(x);
  im->v = std::move(v);
  Potential out;
  out.impl_ = std::move(im);
  return out;
}

Potential Potential::plus(const Potential& other, double t) const {
  if (other.is_zero() || t == 0.0) return *this;
  auto im = std::make_shared<Impl>();
  im->form = Form::sum;
  if (impl_->form == Form::sum)
    im->parts = impl_->parts;
  else if (!is_zero())
    im->parts.push_back({1.0, *this});
  im->parts.push_back({t, other});
  im->gamma = std::max(gamma(), other.gamma());
  Potential out;
  out.impl_ = std::move(im);
  return out;
}

double Potential::operator()(double x) const { return impl_->eval(x); }

Potential::Form Potential::form() const { return impl_->form; }
bool Potential::is_zero() const { return impl_->form == Form::zero; }
double Potential::gamma() const { return impl_->gamma; }
const std::string& Potential::preset() const { return impl_->preset; }
const std::map<std::string, double>& Potential::params() const { return impl_->params; }
const std::vector<double>& Potential::grid_x() const { return impl_->x; }
const std::vector<double>& Potential::grid_v() const { return impl_->v; }
int Potential::interpolation_order() const { return impl_->order; }
const std::vector<std::pair<double, Potential>>& Potential::components() const { return impl_->parts; }

double Potential::w_tail(double x) const {
  switch (impl_->form) {
    case Form::zero: return 0.0;
    case Form::sum: {
      double s = 0.0;
      for (const auto& [w, pot] : impl_->parts) s += std::abs(w) * pot.w_tail(x);
      return s;
    }
    case Form::tabulated: {
      const double lo = std::max(x, impl_->x.front()), hi = impl_->x.back();
      if (lo >= hi) return 0.0;
      return quad::integrate([&](double t) { return std::abs(impl_->eval(t)) / (t * t); }, lo, hi, 1e-10).value;
    }
    case Form::analytic: {
      if (impl_->preset_id == Preset::inverse_power)
        return impl_->p > -1.0 ? std::abs(impl_->c) * std::pow(x, -impl_->p - 1.0) / (impl_->p + 1.0) : INFINITY;
      return quad::integrate([&](double t) { return std::abs(impl_->eval(t)) / (t * t); }, x, INFINITY, 1e-10).value;
    }
  }
  return 0.0;
}

double Potential::w_l1(double a) const { return w_tail(a); }

void Potential::validate(double a) const {
  if (!(gamma() < 2.0)) throw SpecError("potential: decay certificate gamma must be < 2");
  if (impl_->form == Form::sum) {
    for (const auto& [w, pot] : impl_->parts) pot.validate(a);
    return;
  }
  if (impl_->form == Form::zero || impl_->form == Form::tabulated) return;
  if (impl_->preset_id == Preset::inverse_power) {
    if (!(impl_->p + gamma() > 1.0))
      throw SpecError("potential 'inverse_power': x^-gamma |V| not integrable (need p + gamma > 1)");
    return;
  }
  double v = 0.0;
  try {
    v = quad::integrate([&](double t) { return std::pow(t, -gamma()) * std::abs(impl_->eval(t)); }, a, INFINITY, 1e-8).value;
  } catch (const NumericalError& e) {
    throw SpecError(std::string("potential: weighted integral not certified: ") + e.what());
  }
  if (!std::isfinite(v)) throw SpecError("potential: x^-gamma |V| not integrable");
  if (!std::isfinite(w_l1(a))) throw SpecError("potential: V/x^2 not integrable");
}

}  // namespace cuspdet
