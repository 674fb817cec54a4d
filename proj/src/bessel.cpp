#include "cuspdet/bessel.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "cuspdet/errors.hpp"

namespace cuspdet::bessel {

namespace {

constexpr double pi = 3.14159265358979323846;
constexpr double eps = std::numeric_limits<double>::epsilon();

// Order at and above which the Olver expansion is used.
constexpr double uniform_min_order = 20.0;

void check_args(double order, double x) {
  if (!(order >= 0.0) || !std::isfinite(order))
    throw DomainError("bessel: order must be finite and >= 0, got " + std::to_string(order));
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("bessel: argument must be finite and > 0, got " + std::to_string(x));
}

double large_arg_threshold(double order) { return std::max(20.0, order * order); }

Regime auto_regime_k(double order, double x) {
  if (order >= uniform_min_order) return Regime::uniform_order;
  if (x >= large_arg_threshold(order)) return Regime::large_arg;
  return x <= 2.0 ? Regime::series : Regime::continued_fraction;
}

Regime auto_regime_i(double order, double x) {
  if (order >= uniform_min_order) return Regime::uniform_order;
  if (x >= large_arg_threshold(order)) return Regime::large_arg;
  return Regime::series;
}

struct LogValue {
  double log_value;
  double err;
};

// ---- I: power series, summed relative to its first term ----

LogValue series_i(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0, log_shift = 0.0;
  int k = 1;
  for (; k < 100000; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (term < eps * 0.25 * sum && k > q) break;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_shift += 280.0 * std::log(10.0);
    }
  }
  const double lead = (nu > 0 ? nu * std::log(0.5 * x) : 0.0) - std::lgamma(nu + 1.0);
  return {lead + std::log(sum) + log_shift, eps * (4.0 + std::sqrt(double(k)))};
}

// ---- K: Temme's method ----

// Coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k.
constexpr std::array<double, 26> inv_gamma_c = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001};

// gam1 = (1/G(1-m) - 1/G(1+m)) / (2m), gam2 = (1/G(1-m) + 1/G(1+m)) / 2, |m| <= 1/2.
void temme_gammas(double m, double& gam1, double& gam2, double& gampl, double& gammi) {
  gam1 = 0.0;
  gam2 = 0.0;
  const double m2 = m * m;
  // c_k m^{k-1}: odd k feed gam2 (even powers), even k feed -gam1.
  for (int k = static_cast<int>(inv_gamma_c.size()); k >= 1; --k) {
    if (k % 2 == 1)
      gam2 = gam2 * m2 + inv_gamma_c[k - 1];
    else
      gam1 = gam1 * m2 + inv_gamma_c[k - 1];
  }
  gam1 = -gam1;
  gampl = gam2 - m * gam1;  // 1/Gamma(1+m)
  gammi = gam2 + m * gam1;  // 1/Gamma(1-m)
}

struct KPair {
  double log_k;
  double log_k1;
  double err;
};

// K_m(x), K_{m+1}(x) for |m| <= 1/2; the result carries e^{-log_scale}.
void temme_series(double m, double x, double& k0, double& k1, double& err) {
  const double x2 = 0.5 * x;
  const double pim = pi * m;
  const double fact = std::abs(pim) < eps ? 1.0 : pim / std::sin(pim);
  double d = -std::log(x2);
  double e = m * d;
  const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
  double gam1, gam2, gampl, gammi;
  temme_gammas(m, gam1, gam2, gampl, gammi);
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / gampl;
  double q = 0.5 / (e * gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  double big = std::abs(sum), big1 = std::abs(sum1);
  int i = 1;
  for (; i < 10000; ++i) {
    ff = (i * ff + p + q) / (i * double(i) - m * m);
    c *= d / i;
    p /= i - m;
    q /= i + m;
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - i * ff);
    sum1 += del1;
    big = std::max(big, std::abs(del));
    big1 = std::max(big1, std::abs(del1));
    if (std::abs(del) < std::abs(sum) * eps * 0.5) break;
  }
  k0 = sum;
  k1 = sum1 / x2;
  err = eps * (4.0 + 16.0 * std::max(big / std::abs(sum), big1 / std::abs(sum1)));
}

// Steed's continued fraction; returns e^{x} K_m(x), e^{x} K_{m+1}(x).
void temme_cf2(double m, double x, double& k0, double& k1, double& err) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - m * m;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  int i = 1;
  for (; i < 100000; ++i) {
    a -= 2 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps * 0.5) break;
  }
  h = a1 * h;
  k0 = std::sqrt(pi / (2.0 * x)) / s;
  k1 = k0 * (m + x + 0.5 - h) / x;
  err = eps * (4.0 + 0.05 * std::sqrt(double(i)));
}

KPair temme_k(double nu, double x, bool use_series) {
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double m = nu - nl;
  double k0, k1, err;
  double log_scale = 0.0;
  if (use_series) {
    temme_series(m, x, k0, k1, err);
  } else {
    temme_cf2(m, x, k0, k1, err);
    log_scale = -x;
  }
  // Upward recurrence K_{j+1} = (2j/x) K_j + K_{j-1} is stable for K.
  for (int i = 1; i <= nl; ++i) {
    const double kn = (m + i) * (2.0 / x) * k1 + k0;
    k0 = k1;
    k1 = kn;
    if (k1 > 1e250) {
      k0 *= 1e-250;
      k1 *= 1e-250;
      log_scale += 250.0 * std::log(10.0);
    }
  }
  return {std::log(k0) + log_scale, std::log(k1) + log_scale, err + nl * eps};
}

// ---- large argument ----

// log of the Hankel series factor; the prefactor is added by large_arg().
LogValue large_arg_sum(double nu, double x, bool is_i) {
  const double mu4 = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0, prev = 1.0, last = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu4 - odd * odd) / (8.0 * k * x);
    if (is_i) term = -term;
    if (term == 0.0) {
      last = 0.0;
      break;
    }
    if (std::abs(term) > std::abs(prev)) {
      last = std::abs(prev);
      break;
    }
    sum += term;
    last = std::abs(term);
    prev = term;
    if (std::abs(term) < eps * 0.1 * std::abs(sum)) break;
  }
  return {std::log(sum), last / std::abs(sum) + 4.0 * eps};
}

LogValue large_arg(double nu, double x, bool is_i) {
  const LogValue s = large_arg_sum(nu, x, is_i);
  const double lead =
      is_i ? x - 0.5 * std::log(2.0 * pi * x) : 0.5 * std::log(pi / (2.0 * x)) - x;
  return {lead + s.log_value, s.err};
}

// ---- uniform (Olver) ----

struct SeriesSum {
  double sum;
  double truncation;
};

SeriesSum olver_sum(double nu, double p, int terms, bool alternate) {
  const auto& tab = UniformCoeffs::table();
  const bool automatic = terms <= 0;
  const int kmax = automatic ? tab.max_terms() - 1 : terms;
  if (kmax > tab.max_terms() - 1)
    throw DomainError("uniform expansion: " + std::to_string(kmax) +
                      " terms requested, table holds " + std::to_string(tab.max_terms() - 1));
  double sum = 1.0, inv = 1.0;
  int k = 1;
  int small = 0;
  for (; k <= kmax; ++k) {
    inv /= nu;
    double t = tab.u(k, p) * inv;
    if (alternate && (k % 2 == 1)) t = -t;
    sum += t;
    if (automatic) {
      small = std::abs(t) < 0.1 * eps * std::abs(sum) ? small + 1 : 0;
      if (small == 2) {
        ++k;
        break;
      }
    }
  }
  const double next = std::abs(tab.u(k, p) * inv / nu);
  return {sum, next / std::abs(sum)};
}

Truncated uniform_eval(double nu, double t, int terms, bool is_i) {
  const double s = std::hypot(1.0, t);
  const double p = 1.0 / s;
  const double eta = s + std::log(t / (1.0 + s));
  const SeriesSum ser = olver_sum(nu, p, terms, !is_i);
  double lead;
  if (is_i)
    lead = nu * eta - 0.5 * std::log(2.0 * pi * nu) - 0.5 * std::log(s);
  else
    lead = 0.5 * std::log(pi / (2.0 * nu)) - nu * eta - 0.5 * std::log(s);
  return {Scaled::from_log(lead + std::log(ser.sum)), ser.truncation};
}

LogValue uniform_log(double nu, double x, int terms, bool is_i) {
  const Truncated t = uniform_eval(nu, x / nu, terms, is_i);
  return {t.value.log_abs(), t.truncation + 8.0 * eps};
}

LogValue eval_i_log(double nu, double x, Regime r, int terms) {
  switch (r) {
    case Regime::series: return series_i(nu, x);
    case Regime::large_arg: return large_arg(nu, x, true);
    case Regime::uniform_order: return uniform_log(nu, x, terms, true);
    case Regime::continued_fraction: break;
  }
  throw DomainError("bessel: the continued-fraction regime is only available for K");
}

LogValue eval_k_log(double nu, double x, Regime r, int terms) {
  switch (r) {
    case Regime::series: {
      const KPair k = temme_k(nu, x, true);
      return {k.log_k, k.err};
    }
    case Regime::continued_fraction: {
      const KPair k = temme_k(nu, x, false);
      return {k.log_k, k.err};
    }
    case Regime::large_arg: return large_arg(nu, x, false);
    case Regime::uniform_order: return uniform_log(nu, x, terms, false);
  }
  return {};
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v) || v == 0.0)
    throw NumericalError(std::string(what) +
                         ": value outside double range; use the scaled interface");
  return v;
}

}  // namespace

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::series: return "series";
    case Regime::large_arg: return "large-arg";
    case Regime::uniform_order: return "uniform";
    case Regime::continued_fraction: return "continued-fraction";
  }
  return "?";
}

std::optional<Regime> regime_from_string(std::string_view s) {
  if (s == "series") return Regime::series;
  if (s == "large-arg" || s == "large_arg") return Regime::large_arg;
  if (s == "uniform" || s == "uniform_order") return Regime::uniform_order;
  if (s == "continued-fraction" || s == "continued_fraction") return Regime::continued_fraction;
  return std::nullopt;
}

Value modified_i(double order, double x, const Options& opt) {
  check_args(order, x);
  const Regime r = opt.regime.value_or(auto_regime_i(order, x));
  const LogValue v = eval_i_log(order, x, r, opt.uniform_terms);
  return {Scaled::from_log(v.log_value), r, v.err};
}

Value modified_k(double order, double x, const Options& opt) {
  check_args(order, x);
  const Regime r = opt.regime.value_or(auto_regime_k(order, x));
  const LogValue v = eval_k_log(order, x, r, opt.uniform_terms);
  return {Scaled::from_log(v.log_value), r, v.err};
}

BesselEval evaluate(double order, double x, const Options& opt) {
  const Value i = modified_i(order, x, opt);
  const Value k = modified_k(order, x, opt);
  return {order, x, i.value, k.value, i.regime, k.regime, std::max(i.est_rel_err, k.est_rel_err)};
}

double log_bessel_i(double order, double x) { return modified_i(order, x).value.log_abs(); }
double log_bessel_k(double order, double x) { return modified_k(order, x).value.log_abs(); }

double bessel_i(double order, double x) {
  return finite_or_throw(modified_i(order, x).value.value(), "bessel_i");
}

double bessel_k(double order, double x) {
  return finite_or_throw(modified_k(order, x).value.value(), "bessel_k");
}

double bessel_i_scaled(double order, double x) { return std::exp(log_bessel_i(order, x) - x); }
double bessel_k_scaled(double order, double x) { return std::exp(log_bessel_k(order, x) + x); }

LogPair log_pair(double order, double x) {
  check_args(order, x);
  LogPair out{};
  // Large argument: the e^{+-x} prefactors cancel analytically in I K and in the
  // ratios K_{v+1}/K_v, I_{v+1}/I_v; adding the logs would lose x * eps.
  if (auto_regime_k(order, x) == Regime::large_arg && auto_regime_i(order, x) == Regime::large_arg) {
    const double si = large_arg_sum(order, x, true).log_value;
    const double sk = large_arg_sum(order, x, false).log_value;
    out.log_i = x - 0.5 * std::log(2.0 * pi * x) + si;
    out.log_k = 0.5 * std::log(pi / (2.0 * x)) - x + sk;
    out.log_ik = -std::log(2.0 * x) + si + sk;
    out.dlog_k = -std::exp(large_arg_sum(order + 1.0, x, false).log_value - sk) + order / x;
    out.dlog_i = std::exp(large_arg_sum(order + 1.0, x, true).log_value - si) + order / x;
    return out;
  }
  const Regime rk = auto_regime_k(order, x);
  if (rk == Regime::series || rk == Regime::continued_fraction) {
    const KPair k = temme_k(order, x, rk == Regime::series);
    out.log_k = k.log_k;
    out.dlog_k = -std::exp(k.log_k1 - k.log_k) + order / x;
  } else {
    out.log_k = eval_k_log(order, x, rk, 0).log_value;
    const double lk1 = eval_k_log(order + 1.0, x, auto_regime_k(order + 1.0, x), 0).log_value;
    out.dlog_k = -std::exp(lk1 - out.log_k) + order / x;
  }
  out.log_i = eval_i_log(order, x, auto_regime_i(order, x), 0).log_value;
  const double li1 = eval_i_log(order + 1.0, x, auto_regime_i(order + 1.0, x), 0).log_value;
  out.dlog_i = std::exp(li1 - out.log_i) + order / x;
  if (rk == Regime::uniform_order && auto_regime_i(order, x) == Regime::uniform_order) {
    const double t = x / order, sq = std::hypot(1.0, t);
    out.log_ik = -std::log(2.0 * order * sq) + std::log(olver_sum(order, 1.0 / sq, 0, false).sum) +
                 std::log(olver_sum(order, 1.0 / sq, 0, true).sum);
  } else {
    out.log_ik = out.log_i + out.log_k;
  }
  return out;
}

double bessel_i_prime(double order, double x) {
  const LogPair lp = log_pair(order, x);
  return finite_or_throw(std::exp(lp.log_i) * lp.dlog_i, "bessel_i_prime");
}

double bessel_k_prime(double order, double x) {
  const LogPair lp = log_pair(order, x);
  return finite_or_throw(std::exp(lp.log_k) * lp.dlog_k, "bessel_k_prime");
}

// ---- Olver coefficient table ----

UniformCoeffs::UniformCoeffs() {
  constexpr int kmax = 18;
  std::vector<std::vector<long double>> u(kmax + 1);
  u[0] = {1.0L};
  for (int k = 0; k < kmax; ++k) {
    const auto& c = u[k];
    std::vector<long double> next(3 * (k + 1) + 1, 0.0L);
    // 1/2 p^2 (1 - p^2) u_k'(p)
    for (std::size_t j = 1; j < c.size(); ++j) {
      const long double d = j * c[j];
      next[j + 1] += 0.5L * d;
      next[j + 3] -= 0.5L * d;
    }
    // 1/8 int_0^p (1 - 5 t^2) u_k(t) dt
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j] / (8.0L * (j + 1));
      next[j + 3] -= 5.0L * c[j] / (8.0L * (j + 3));
    }
    u[k + 1] = std::move(next);
  }
  polys_.reserve(u.size());
  for (const auto& c : u) polys_.emplace_back(c.begin(), c.end());
}

const UniformCoeffs& UniformCoeffs::table() {
  static const UniformCoeffs t;
  return t;
}

const std::vector<double>& UniformCoeffs::poly(int k) const {
  if (k < 0 || k > max_terms())
    throw DomainError("uniform coefficient index " + std::to_string(k) + " out of range");
  return polys_[k];
}

double UniformCoeffs::u(int k, double p) const {
  const auto& c = poly(k);
  double s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * p + *it;
  return s;
}

double UniformCoeffs::xi(double x) {
  const double s = std::hypot(1.0, x);
  return s + std::log(x / (1.0 + s));
}

double UniformCoeffs::p(double x) { return 1.0 / std::hypot(1.0, x); }

Truncated uniform_i(double order, double x_scaled, int terms) {
  check_args(order, x_scaled);
  if (order <= 0.0) throw DomainError("uniform expansion needs order > 0");
  if (terms < 0) throw DomainError("uniform expansion: negative term count");
  return uniform_eval(order, x_scaled, terms == 0 ? -1 : terms, true);
}

Truncated uniform_k(double order, double x_scaled, int terms) {
  check_args(order, x_scaled);
  if (order <= 0.0) throw DomainError("uniform expansion needs order > 0");
  if (terms < 0) throw DomainError("uniform expansion: negative term count");
  return uniform_eval(order, x_scaled, terms == 0 ? -1 : terms, false);
}

ProductValue uniform_product(double order, double x_scaled, int terms) {
  check_args(order, x_scaled);
  if (order <= 0.0) throw DomainError("uniform expansion needs order > 0");
  const auto& tab = UniformCoeffs::table();
  if (terms < 0 || terms > tab.max_terms() - 1)
    throw DomainError("uniform_product: term count outside stored table");
  const double p = UniformCoeffs::p(x_scaled);
  std::vector<double> uk(terms + 2);
  for (int k = 0; k <= terms + 1; ++k) uk[k] = tab.u(k, p);
  // Cauchy product of sum u_k/z^k and sum (-1)^k u_k/z^k; odd orders cancel.
  auto coeff = [&](int n) {
    double c = 0.0;
    for (int k = 0; k <= n; ++k) c += ((k % 2) ? -1.0 : 1.0) * uk[k] * uk[n - k];
    return c;
  };
  double sum = 0.0, inv = 1.0;
  for (int n = 0; n <= terms; ++n) {
    sum += coeff(n) * inv;
    inv /= order;
  }
  const double lead = 1.0 / (2.0 * order * std::hypot(1.0, x_scaled));
  return {lead * sum, std::abs(coeff(terms + 1) * inv / sum)};
}

std::vector<double> large_arg_coeffs(double order, int count) {
  if (!(order >= 0.0)) throw DomainError("large_arg_coeffs: order must be >= 0");
  std::vector<double> a(count);
  double t = 1.0;
  const double mu4 = 4.0 * order * order;
  for (int k = 1; k <= count; ++k) {
    const double odd = 2.0 * k - 1.0;
    t *= (mu4 - odd * odd) / (8.0 * k);
    a[k - 1] = t;
  }
  return a;
}

double log_i_large_order_leading(double order, double x) {
  check_args(order, x);
  return -0.5 * std::log(2.0 * pi * order) + order * std::log(std::exp(1.0) * x / (2.0 * order));
}

double log_k_large_order_leading(double order, double x) {
  check_args(order, x);
  return 0.5 * std::log(pi / (2.0 * order)) - order * std::log(std::exp(1.0) * x / (2.0 * order));
}

LogDerivAsymptotic bessel_k_log_derivative_order_asymptotic(double order, double x,
                                                            double min_order) {
  check_args(order, x);
  const double leading = -order / x;
  const LogPair lp = log_pair(order, x);
  return {leading, lp.dlog_k - leading, order < min_order};
}

}  // namespace cuspdet::bessel
