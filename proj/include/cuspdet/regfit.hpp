#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

/// Regularized limits and partie-finie integrals from sampled functions with a
/// known asymptotic basis x^alpha log^k x.
namespace cuspdet::regfit {

struct Term {
  double alpha;
  int k;
  bool operator==(const Term&) const = default;
};

std::string to_string(const Term& t);

class ExpansionBasis {
 public:
  /// Terms must be ordered by decreasing alpha, then decreasing k. The remainder
  /// exponent defaults to (smallest alpha) - 1.
  explicit ExpansionBasis(std::vector<Term> terms, std::optional<double> remainder_alpha = {});

  const std::vector<Term>& terms() const { return terms_; }
  double remainder_alpha() const { return remainder_alpha_; }
  std::size_t size() const { return terms_.size(); }
  std::optional<std::size_t> index_of(double alpha, int k) const;
  double eval_term(std::size_t i, double x) const;

 private:
  std::vector<Term> terms_;
  double remainder_alpha_;
};

struct Sample {
  double x;
  double f;
};

struct FitOptions {
  double condition_ceiling = 1e10;
};

struct ExpansionModel {
  ExpansionBasis basis;
  std::vector<double> coeffs;
  std::vector<double> std_errors;
  std::pair<double, double> fit_window;
  double condition_number;
  double residual_rms;
  double relative_residual;  ///< residual_rms / rms(f)

  double eval(double x) const;
  /// Coefficient of x^alpha log^k x (0 if the basis lacks the term).
  double coeff(double alpha, int k) const;
};

ExpansionModel fit_expansion(const std::vector<Sample>& samples, const ExpansionBasis& basis,
                             const FitOptions& opt = {});

/// The constant term a_00.
double reg_lim(const ExpansionModel& model);

/// F with d/dx F = x^alpha log^k x whose expansion at infinity has no constant term;
/// the partie-finie integral of the term over [x, infinity) is -F(x).
double finite_part_antiderivative(const Term& t, double x);

/// Partie-finie integral of the model over [x_star, infinity).
double regularized_tail(const ExpansionModel& model, double x_star);

struct RegIntOptions {
  double quad_tol = 1e-12;       ///< relative tolerance on [c, X*]
  double window_decades = 1.5;   ///< fit window [X*, X* 10^decades]
  int points_per_decade = 40;
  double residual_ceiling = 1e-6;  ///< relative fit residual allowed beyond X*
  FitOptions fit;
};

struct RegIntResult {
  double value;
  double quad_part;
  double tail_part;
  ExpansionModel model;
};

/// Partie-finie integral of f over [c, infinity): quadrature on [c, X*] and the
/// fitted expansion's regularized tail beyond X*.
RegIntResult reg_int_semiinf(const std::function<double(double)>& f, double c,
                             const ExpansionBasis& basis, double x_star,
                             const RegIntOptions& opt = {});

/// Geometric sample grid on [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, int n);

struct TranslationCheck {
  double lhs;  ///< partie finie of int_0^inf f(x + t) dt, from a fit in the upper limit R
  double rhs;  ///< partie finie of int_x^inf f(t) dt
};

/// Both sides of the translation identity; refuses bases with a non-negative
/// integer exponent, for which the identity fails.
TranslationCheck translation_invariance_check(const std::function<double(double)>& f,
                                              const ExpansionBasis& basis, double x,
                                              double x_star, const RegIntOptions& opt = {});

}  // namespace cuspdet::regfit
