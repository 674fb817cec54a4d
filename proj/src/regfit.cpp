#include "cuspdet/regfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "cuspdet/errors.hpp"
#include "cuspdet/quadrature.hpp"

namespace cuspdet::regfit {

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double term_value(const Term& t, double x) {
  const double l = std::log(x);
  return std::pow(x, t.alpha) * std::pow(l, t.k);
}

bool is_nonneg_integer(double a) { return a >= 0.0 && std::floor(a) == a; }

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  os << "(" << t.alpha << "," << t.k << ")";
  return os.str();
}

ExpansionBasis::ExpansionBasis(std::vector<Term> terms, std::optional<double> remainder_alpha)
    : terms_(std::move(terms)) {
  if (terms_.empty()) throw SpecError("expansion basis: no terms");
  for (const Term& t : terms_) {
    if (!std::isfinite(t.alpha) || t.k < 0)
      throw SpecError("expansion basis: invalid term " + to_string(t));
  }
  for (std::size_t i = 1; i < terms_.size(); ++i) {
    const Term& a = terms_[i - 1];
    const Term& b = terms_[i];
    if (!(a.alpha > b.alpha || (a.alpha == b.alpha && a.k > b.k)))
      throw SpecError("expansion basis: terms must be ordered by decreasing alpha then k; " +
                      to_string(a) + " precedes " + to_string(b));
  }
  const double lowest = terms_.back().alpha;
  remainder_alpha_ = remainder_alpha.value_or(lowest - 1.0);
  if (!(remainder_alpha_ < lowest))
    throw SpecError("expansion basis: remainder exponent must lie below every term");
}

std::optional<std::size_t> ExpansionBasis::index_of(double alpha, int k) const {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i].alpha == alpha && terms_[i].k == k) return i;
  return std::nullopt;
}

double ExpansionBasis::eval_term(std::size_t i, double x) const { return term_value(terms_[i], x); }

double ExpansionModel::eval(double x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * basis.eval_term(i, x);
  return s;
}

double ExpansionModel::coeff(double alpha, int k) const {
  const auto i = basis.index_of(alpha, k);
  return i ? coeffs[*i] : 0.0;
}

ExpansionModel fit_expansion(const std::vector<Sample>& samples, const ExpansionBasis& basis,
                             const FitOptions& opt) {
  const int n = static_cast<int>(basis.size());
  const int m = static_cast<int>(samples.size());
  if (m < 2 * n)
    throw FitError("fit_expansion: " + std::to_string(m) + " samples for " + std::to_string(n) +
                       " terms (need at least twice as many)",
                   INFINITY);
  double lo = INFINITY, hi = -INFINITY;
  for (const Sample& s : samples) {
    if (!(s.x > 0.0) || !std::isfinite(s.f))
      throw FitError("fit_expansion: sample with x <= 0 or non-finite value", INFINITY);
    lo = std::min(lo, s.x);
    hi = std::max(hi, s.x);
  }
  if (hi < 10.0 * lo * (1.0 - 1e-12))
    throw FitError("fit_expansion: samples span less than one decade", INFINITY);
  {
    std::vector<double> xs;
    for (const Sample& s : samples) xs.push_back(s.x);
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end())
      throw FitError("fit_expansion: repeated abscissae", INFINITY);
  }

  // Work in u = x / x_mid so that log u is centred; map back afterwards. The map
  // needs every (alpha, k-1) alongside (alpha, k).
  bool closed = true;
  for (const Term& t : basis.terms())
    if (t.k > 0 && !basis.index_of(t.alpha, t.k - 1)) closed = false;
  const double xm = closed ? std::sqrt(lo * hi) : 1.0;
  const double L = std::log(xm);

  Eigen::MatrixXd A(m, n);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double u = samples[i].x / xm;
    for (int j = 0; j < n; ++j) A(i, j) = basis.eval_term(j, u);
    b(i) = samples[i].f;
  }
  Eigen::VectorXd scale(n);
  for (int j = 0; j < n; ++j) {
    scale(j) = A.col(j).norm();
    if (scale(j) == 0.0) throw FitError("fit_expansion: identically zero design column", INFINITY);
    A.col(j) /= scale(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(n - 1);
  if (!(cond <= opt.condition_ceiling))
    throw FitError("fit_expansion: design matrix rank deficient (condition number " +
                       std::to_string(cond) + ")",
                   cond);
  const Eigen::VectorXd y = svd.solve(b);
  const Eigen::VectorXd r = A * y - b;
  const double rss = r.squaredNorm();
  const double sigma2 = m > n ? rss / (m - n) : 0.0;
  // Covariance in scaled u-coordinates.
  Eigen::MatrixXd Vs = svd.matrixV();
  for (int j = 0; j < n; ++j) Vs.col(j) /= sv(j);
  Eigen::MatrixXd cov = sigma2 * Vs * Vs.transpose();
  Eigen::VectorXd d = y.cwiseQuotient(scale);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov(i, j) /= scale(i) * scale(j);

  // d = M c with d_{a,j} = xm^a sum_{k >= j} C(k,j) L^{k-j} c_{a,k}.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Term& ti = basis.terms()[i];
    for (int j = 0; j < n; ++j) {
      const Term& tj = basis.terms()[j];
      if (tj.alpha != ti.alpha || tj.k < ti.k) continue;
      M(i, j) = std::pow(xm, ti.alpha) * binom(tj.k, ti.k) * std::pow(L, tj.k - ti.k);
    }
  }
  const Eigen::MatrixXd Minv = M.inverse();
  const Eigen::VectorXd c = Minv * d;
  const Eigen::MatrixXd cc = Minv * cov * Minv.transpose();

  ExpansionModel out{basis, {}, {}, {lo, hi}, cond, 0.0, 0.0};
  out.coeffs.assign(c.data(), c.data() + n);
  out.std_errors.resize(n);
  for (int j = 0; j < n; ++j) out.std_errors[j] = std::sqrt(std::max(0.0, cc(j, j)));
  out.residual_rms = std::sqrt(rss / m);
  out.relative_residual = out.residual_rms / std::max(b.norm() / std::sqrt(double(m)), 1e-300);
  for (double v : out.coeffs)
    if (!std::isfinite(v)) throw FitError("fit_expansion: non-finite coefficient", cond);
  return out;
}

double reg_lim(const ExpansionModel& model) {
  const auto i = model.basis.index_of(0.0, 0);
  if (!i) throw SpecError("reg_lim: basis has no (0,0) term");
  return model.coeffs[*i];
}

double finite_part_antiderivative(const Term& t, double x) {
  const double l = std::log(x);
  if (t.alpha == -1.0) return std::pow(l, t.k + 1) / (t.k + 1);
  // x^{a+1} sum_j (-1)^j k!/(k-j)! log^{k-j} x / (a+1)^{j+1}
  const double a1 = t.alpha + 1.0;
  double s = 0.0, fall = 1.0;
  for (int j = 0; j <= t.k; ++j) {
    if (j > 0) fall *= (t.k - j + 1);
    s += ((j % 2) ? -1.0 : 1.0) * fall * std::pow(l, t.k - j) / std::pow(a1, j + 1);
  }
  return std::pow(x, a1) * s;
}

double regularized_tail(const ExpansionModel& model, double x_star) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.coeffs.size(); ++i)
    s -= model.coeffs[i] * finite_part_antiderivative(model.basis.terms()[i], x_star);
  return s;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw DomainError("geometric_grid: bad range");
  std::vector<double> g(n);
  const double r = std::log(hi / lo);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(r * i / (n - 1));
  g.back() = hi;
  return g;
}

RegIntResult reg_int_semiinf(const std::function<double(double)>& f, double c,
                             const ExpansionBasis& basis, double x_star,
                             const RegIntOptions& opt) {
  if (!(x_star > c)) throw DomainError("reg_int_semiinf: split point must exceed the lower limit");
  if (!(x_star > 0.0)) throw DomainError("reg_int_semiinf: split point must be positive");
  const quad::Result q = quad::integrate(f, c, x_star, opt.quad_tol);
  const int n = std::max(2 * static_cast<int>(basis.size()),
                         static_cast<int>(std::ceil(opt.points_per_decade * opt.window_decades)) + 1);
  std::vector<Sample> samples;
  for (double x : geometric_grid(x_star, x_star * std::pow(10.0, opt.window_decades), n))
    samples.push_back({x, f(x)});
  ExpansionModel model = fit_expansion(samples, basis, opt.fit);
  if (model.relative_residual > opt.residual_ceiling)
    throw FitError("reg_int_semiinf: fit residual " + std::to_string(model.relative_residual) +
                       " beyond X* exceeds ceiling",
                   model.condition_number);
  const double tail = regularized_tail(model, x_star);
  return {q.value + tail, q.value, tail, std::move(model)};
}

TranslationCheck translation_invariance_check(const std::function<double(double)>& f,
                                              const ExpansionBasis& basis, double x,
                                              double x_star, const RegIntOptions& opt) {
  for (const Term& t : basis.terms())
    if (is_nonneg_integer(t.alpha))
      throw SpecError("translation_invariance_check: exponent " + to_string(t) +
                      " is a non-negative integer; the identity does not hold");
  const double rhs = reg_int_semiinf(f, x, basis, x + x_star, opt).value;

  // Expansion of G(R) = int_0^R f(x+t) dt in R: powers alpha+1-j (or -j with an
  // extra log for alpha = -1), kept above the remainder, plus the constant.
  // Translation produces every power a0 - j. Keep up to three orders past the
  // remainder, fewer when the design matrix becomes too collinear.
  const double rem = basis.remainder_alpha() + 1.0;
  const int n = std::max(2 * static_cast<int>(basis.size()) + 12,
                         static_cast<int>(std::ceil(opt.points_per_decade * opt.window_decades)) + 1);
  const auto grid = geometric_grid(x_star, x_star * std::pow(10.0, opt.window_decades), n);
  std::vector<Sample> samples;
  double acc = quad::integrate(f, x, x + grid.front(), opt.quad_tol).value;
  samples.push_back({grid.front(), acc});
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += quad::integrate(f, x + grid[i - 1], x + grid[i], opt.quad_tol).value;
    samples.push_back({grid[i], acc});
  }
  for (int extra = 3;; --extra) {
    const double floor_alpha = rem - extra;
    std::vector<Term> gt{{0.0, 0}};
    auto add = [&](double a, int k) {
      if (a < floor_alpha) return;
      for (const Term& t : gt)
        if (t.alpha == a && t.k == k) return;
      gt.push_back({a, k});
    };
    for (const Term& t : basis.terms()) {
      const bool logint = t.alpha == -1.0;
      const int kmax = logint ? t.k + 1 : t.k;
      const double a0 = logint ? 0.0 : t.alpha + 1.0;
      for (int j = 0; a0 - j >= floor_alpha; ++j)
        for (int k = 0; k <= (logint && j > 0 ? kmax - 1 : kmax); ++k) add(a0 - j, k);
    }
    std::sort(gt.begin(), gt.end(), [](const Term& a, const Term& b) {
      return a.alpha > b.alpha || (a.alpha == b.alpha && a.k > b.k);
    });
    try {
      const ExpansionModel gm = fit_expansion(samples, ExpansionBasis(gt, floor_alpha - 1.0), opt.fit);
      return {reg_lim(gm), rhs};
    } catch (const FitError&) {
      if (extra == 0) throw;
    }
  }
}

}  // namespace cuspdet::regfit
