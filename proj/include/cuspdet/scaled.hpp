#pragma once

#include <cmath>

namespace cuspdet {

/// Real number stored as mantissa * exp(exponent).
///
/// Bessel functions of large order or argument leave the double range long before
/// the quantities built from them do (ratios, products, Green functions), so values
/// are carried in this form and only collapsed with value() at the end.
struct Scaled {
  double mantissa = 0.0;
  double exponent = 0.0;

  static Scaled from_log(double log_abs, double sign = 1.0) { return {sign, log_abs}; }

  double value() const { return mantissa * std::exp(exponent); }
  double log_abs() const { return std::log(std::abs(mantissa)) + exponent; }
  double sign() const { return mantissa < 0 ? -1.0 : 1.0; }
  bool representable() const { return std::isfinite(value()) && (mantissa == 0 || value() != 0); }

  Scaled operator*(const Scaled& o) const { return {mantissa * o.mantissa, exponent + o.exponent}; }
  Scaled operator/(const Scaled& o) const { return {mantissa / o.mantissa, exponent - o.exponent}; }
  Scaled operator*(double s) const { return {mantissa * s, exponent}; }
};

}  // namespace cuspdet
