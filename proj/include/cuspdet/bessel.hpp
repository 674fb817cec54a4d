#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cuspdet/scaled.hpp"

/// Modified Bessel functions I_nu(x), K_nu(x) of real order nu >= 0 and argument x > 0.
namespace cuspdet::bessel {

enum class Regime { series, large_arg, uniform_order, continued_fraction };

std::string_view to_string(Regime r);
std::optional<Regime> regime_from_string(std::string_view s);

struct Options {
  std::optional<Regime> regime;  ///< forced regime; chosen from (order, x) when empty
  int uniform_terms = 0;         ///< Olver terms; 0 means "until below double precision"
};

struct Value {
  Scaled value;
  Regime regime;
  double est_rel_err;
};

Value modified_i(double order, double x, const Options& opt = {});
Value modified_k(double order, double x, const Options& opt = {});

struct BesselEval {
  double order;
  double argument;
  Scaled value_i;
  Scaled value_k;
  Regime regime_i;
  Regime regime_k;
  double est_rel_err;
};

BesselEval evaluate(double order, double x, const Options& opt = {});

// Plain doubles. These throw NumericalError when the value leaves the double range;
// use modified_i / modified_k (scaled) or the log forms instead.
double bessel_i(double order, double x);
double bessel_k(double order, double x);
double bessel_i_prime(double order, double x);
double bessel_k_prime(double order, double x);

double bessel_i_scaled(double order, double x);  ///< e^{-x} I_order(x)
double bessel_k_scaled(double order, double x);  ///< e^{x} K_order(x)
double log_bessel_i(double order, double x);
double log_bessel_k(double order, double x);

/// log I, log K, log(I K) and the logarithmic derivatives I'/I, K'/K at one point.
/// log_ik is computed without the cancellation of log_i + log_k at large argument.
struct LogPair {
  double log_i;
  double log_k;
  double log_ik;
  double dlog_i;
  double dlog_k;
};

LogPair log_pair(double order, double x);

/// Olver's polynomials u_k(p), generated from the standard recursion at first use.
class UniformCoeffs {
 public:
  static const UniformCoeffs& table();

  int max_terms() const { return static_cast<int>(polys_.size()) - 1; }
  /// Coefficients of u_k in ascending powers of p (u_0 = 1).
  const std::vector<double>& poly(int k) const;
  double u(int k, double p) const;

  static double xi(double x);  ///< sqrt(1+x^2) + log(x/(1+sqrt(1+x^2)))
  static double p(double x);   ///< (1+x^2)^{-1/2}

 private:
  UniformCoeffs();
  std::vector<std::vector<double>> polys_;
};

struct Truncated {
  Scaled value;
  double truncation;  ///< relative size of the first omitted term
};

/// Truncated Olver expansions at the point order*x_scaled.
Truncated uniform_i(double order, double x_scaled, int terms = 3);
Truncated uniform_k(double order, double x_scaled, int terms = 3);

struct ProductValue {
  double value;
  double truncation;
};

/// I_z(zx) K_z(zx) from the Cauchy product of the two Olver series.
ProductValue uniform_product(double order, double x_scaled, int terms = 3);

/// A_1(z) .. A_count(z) of the large-argument expansion.
std::vector<double> large_arg_coeffs(double order, int count);

/// Leading terms of log I_z(x), log K_z(x) for z -> infinity at fixed x.
double log_i_large_order_leading(double order, double x);
double log_k_large_order_leading(double order, double x);

struct LogDerivAsymptotic {
  double leading;    ///< -order/x
  double remainder;  ///< K'/K - leading, measured
  bool below_min_order;
};

LogDerivAsymptotic bessel_k_log_derivative_order_asymptotic(double order, double x,
                                                            double min_order = 20.0);

}  // namespace cuspdet::bessel
