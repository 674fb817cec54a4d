#pragma once

// High-precision reference values for I and K by direct summation of the power
// series, K through (pi/2)(I_{-v} - I_v)/sin(v pi). Integer orders are shifted by
// 1e-40, far below double resolution. Only for tests: slow.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

namespace oracle {

using mp = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<240>>;

inline mp series_i(const mp& v, const mp& x) {
  const mp q = x * x / 4;
  mp term = pow(x / 2, v) / boost::math::tgamma(v + 1);
  mp sum = term;
  const mp tiny = mp("1e-230");
  for (int k = 1; k < 20000; ++k) {
    term *= q / (mp(k) * (mp(k) + v));
    sum += term;
    if (k > x && abs(term) < tiny * abs(sum)) break;
  }
  return sum;
}

inline mp i_mp(double order, double x) { return series_i(mp(order), mp(x)); }

inline mp k_mp(double order, double x) {
  mp v = mp(order);
  if (std::floor(order) == order) v += mp("1e-40");
  const mp pi = boost::math::constants::pi<mp>();
  return pi / 2 * (series_i(-v, mp(x)) - series_i(v, mp(x))) / sin(v * pi);
}

inline double log_i(double order, double x) { return static_cast<double>(log(i_mp(order, x))); }
inline double log_k(double order, double x) { return static_cast<double>(log(k_mp(order, x))); }
inline double i(double order, double x) { return static_cast<double>(i_mp(order, x)); }
inline double k(double order, double x) { return static_cast<double>(k_mp(order, x)); }

}  // namespace oracle
