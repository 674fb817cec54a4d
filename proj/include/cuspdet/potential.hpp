#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cuspdet {

/// Perturbation V(x) together with its decay certificate gamma (V in x^gamma L^1, gamma < 2).
///
/// Analytic presets:
///   sqrt_exp       c * x^{1/2} * exp(-rate x)
///   exp            c * exp(-rate x)
///   inverse_power  c * x^{-p}
/// Tabulated potentials interpolate (linear or natural cubic) and vanish outside the grid.
class Potential {
 public:
  enum class Form { zero, analytic, tabulated, sum };

  Potential();  // zero

  static Potential zero() { return {}; }
  static Potential analytic(const std::string& preset, std::map<std::string, double> params,
                            std::optional<double> gamma = {});
  static Potential sqrt_exp(double c, double rate = 1.0);
  static Potential exp_decay(double c, double rate);
  static Potential inverse_power(double c, double p);
  static Potential tabulated(std::vector<double> x, std::vector<double> v, int order = 3,
                             std::optional<double> gamma = {});

  /// this + t * other
  Potential plus(const Potential& other, double t) const;

  double operator()(double x) const;

  Form form() const;
  bool is_zero() const;
  double gamma() const;
  const std::string& preset() const;
  const std::map<std::string, double>& params() const;
  const std::vector<double>& grid_x() const;
  const std::vector<double>& grid_v() const;
  int interpolation_order() const;
  const std::vector<std::pair<double, Potential>>& components() const;

  /// Upper bound for the integral of |V|/x^2 over [x, infinity).
  double w_tail(double x) const;
  /// Integral of |V|/x^2 over [a, infinity).
  double w_l1(double a) const;
  /// Certifies gamma < 2 and finiteness of the weighted integrals; throws SpecError.
  void validate(double a) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace cuspdet
