#include "cuspdet/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "cuspdet/errors.hpp"

namespace cuspdet::quad {

namespace {

struct Segment {
  double lo, hi, value, error, l1;
  unsigned depth;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One Gauss-Kronrod 15/31 panel. Boost's recursive driver leaves the local error
// estimate in [-1, 1] units, so only its nodes and weights are used here.
Segment gk31(const std::function<double(double)>& g, double lo, double hi, unsigned depth) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
  using gauss = boost::math::quadrature::gauss<double, 15>;
  const auto& x = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  double f0 = g(c);
  double k = f0 * wk[0], ga = f0 * wg[0], l1 = std::abs(f0) * wk[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = g(c + h * x[i]), fm = g(c - h * x[i]);
    k += (fp + fm) * wk[i];
    l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
    if (i % 2 == 0) ga += (fp + fm) * wg[i / 2];
  }
  const double err = std::max(std::abs(k - ga), 50.0 * std::numeric_limits<double>::epsilon() * l1);
  return {lo, hi, h * k, h * err, h * l1, depth};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 unsigned max_depth) {
  if (a == b) return {0.0, 0.0};
  if (std::isinf(a)) throw DomainError("quadrature: lower limit must be finite");
  if (b < a) {
    const Result r = integrate(f, b, a, rel_tol, max_depth);
    return {-r.value, r.error};
  }
  bool bad = false;
  std::function<double(double)> g;
  double lo = a, hi = b;
  if (std::isinf(b)) {
    // x = a + t / (1 - t) on [0, 1).
    g = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double u = 1.0 - t;
      const double v = f(a + t / u) / (u * u);
      if (!std::isfinite(v)) bad = true;
      return std::isfinite(v) ? v : 0.0;
    };
    lo = 0.0;
    hi = 1.0;
  } else {
    g = [&](double x) {
      const double v = f(x);
      if (!std::isfinite(v)) bad = true;
      return std::isfinite(v) ? v : 0.0;
    };
  }
  std::priority_queue<Segment> heap;
  std::vector<Segment> done;
  heap.push(gk31(g, lo, hi, 0));
  double value = heap.top().value, error = heap.top().error, l1 = heap.top().l1;
  const std::size_t max_segments = 4000;
  while (!heap.empty() && error > rel_tol * std::abs(value) && heap.size() + done.size() < max_segments) {
    Segment s = heap.top();
    heap.pop();
    if (s.depth >= max_depth + 12 || s.hi - s.lo <= 1e-14 * std::max(std::abs(s.lo), std::abs(s.hi))) {
      done.push_back(s);
      continue;
    }
    const double mid = 0.5 * (s.lo + s.hi);
    const Segment l = gk31(g, s.lo, mid, s.depth + 1), r = gk31(g, mid, s.hi, s.depth + 1);
    value += l.value + r.value - s.value;
    error += l.error + r.error - s.error;
    l1 += l.l1 + r.l1 - s.l1;
    heap.push(l);
    heap.push(r);
  }
  if (bad)
    throw NumericalError("quadrature: non-finite integrand on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  // Re-sum to shed the drift of the running totals.
  value = 0.0;
  error = 0.0;
  l1 = 0.0;
  for (; !heap.empty(); heap.pop()) done.push_back(heap.top());
  std::sort(done.begin(), done.end(), [](const Segment& x, const Segment& y) { return x.lo < y.lo; });
  for (const Segment& s : done) {
    value += s.value;
    error += s.error;
    l1 += s.l1;
  }
  if (error > 100.0 * rel_tol * std::max(std::abs(value), 1e-3 * l1) && error > 1e-300)
    throw NumericalError("quadrature: error estimate " + std::to_string(error) +
                         " above target on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "] (singular integrand?)");
  return {value, error};
}

PanelRule::PanelRule() {
  constexpr int n = order;
  const double pi = std::acos(-1.0);
  t_.resize(n);
  for (int j = 0; j < n; ++j) t_[j] = -std::cos(pi * j / (n - 1));
  // Chebyshev coefficients from values: V(j,k) = T_k(t_j).
  Eigen::MatrixXd V(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) V(j, k) = std::cos(k * std::acos(std::clamp(t_[j], -1.0, 1.0)));
  const Eigen::MatrixXd Vinv = V.inverse();
  // Antiderivatives F_k with F_k(1) - F_k(t).
  auto antider = [](int k, double t) {
    auto T = [](int m, double s) { return std::cos(m * std::acos(std::clamp(s, -1.0, 1.0))); };
    if (k == 0) return t;
    if (k == 1) return 0.5 * t * t;
    return T(k + 1, t) / (2.0 * (k + 1)) - T(k - 1, t) / (2.0 * (k - 1));
  };
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) M(j, k) = antider(k, 1.0) - antider(k, t_[j]);
  const Eigen::MatrixXd R = M * Vinv;
  rmat_.resize(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) rmat_[j * n + k] = R(j, k);
  w_.resize(n);
  for (int k = 0; k < n; ++k) w_[k] = R(0, k);
  bary_.resize(n);
  for (int j = 0; j < n; ++j) bary_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
}

const PanelRule& PanelRule::get() {
  static const PanelRule rule;
  return rule;
}

double PanelRule::right_cumulative(int j, const double* g) const {
  double s = 0.0;
  const double* row = rmat_.data() + j * order;
  for (int k = 0; k < order; ++k) s += row[k] * g[k];
  return s;
}

double PanelRule::interpolate(const double* g, double t) const {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < order; ++j) {
    const double d = t - t_[j];
    if (d == 0.0) return g[j];
    const double c = bary_[j] / d;
    num += c * g[j];
    den += c;
  }
  return num / den;
}

double PanelGrid::node(int p, int j) const {
  const double l = edges[p], r = edges[p + 1];
  const double t = PanelRule::get().nodes()[j];
  if (j == 0) return l;
  if (j == PanelRule::order - 1) return r;
  return 0.5 * (l + r) + 0.5 * (r - l) * t;
}

int PanelGrid::locate(double x) const {
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const int p = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(p, 0, panels() - 1);
}

double PanelGrid::integrate(const std::vector<double>& values) const {
  const auto& w = PanelRule::get().weights();
  double s = 0.0;
  for (int p = 0; p < panels(); ++p) {
    double ps = 0.0;
    for (int j = 0; j < PanelRule::order; ++j) ps += w[j] * values[p * PanelRule::order + j];
    s += 0.5 * (edges[p + 1] - edges[p]) * ps;
  }
  return s;
}

double PanelGrid::interpolate(const std::vector<double>& values, double x) const {
  const int p = locate(x);
  const double l = edges[p], r = edges[p + 1];
  const double t = std::clamp((2.0 * x - l - r) / (r - l), -1.0, 1.0);
  return PanelRule::get().interpolate(values.data() + p * PanelRule::order, t);
}

PanelGrid make_grid(double lo, double hi, const std::function<double(double)>& local_scale,
                    double h_max) {
  if (!(hi > lo)) throw DomainError("make_grid: empty interval");
  PanelGrid g;
  g.edges.push_back(lo);
  double x = lo;
  while (x < hi) {
    const double h = std::min(h_max, local_scale(x));
    if (!(h > 0.0)) throw NumericalError("make_grid: non-positive panel width");
    double next = x + h;
    if (next > hi - 0.25 * h) next = hi;
    g.edges.push_back(next);
    x = next;
    if (g.edges.size() > 2000000) throw NumericalError("make_grid: too many panels");
  }
  return g;
}

}  // namespace cuspdet::quad
