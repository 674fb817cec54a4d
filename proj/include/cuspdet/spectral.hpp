#pragma once

#include <string>
#include <vector>

#include "cuspdet/operator.hpp"

/// Finite-difference eigenvalue oracle for H on a truncated interval [a, R].
///
/// With x = e^s and f = e^{-s/2} u the operator becomes -u'' + (mu^2 e^{2s} + V(e^s)) u on
/// [log a, log R] in L^2(ds): the -1/4 cancels and the grid resolves the boundary layer at a
/// and the oscillation near the turning point alike. Dirichlet at R; at a either u = 0 or
/// u' + beta u = 0 with beta = alpha a - 1/2.
namespace cuspdet::spectral {

/// Symmetric tridiagonal matrix for one grid.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  ///< off[i] couples i and i + 1
  double h;                 ///< step in s
  std::vector<double> s;    ///< node of each unknown
};

/// `intervals` uniform steps in s on [log a, log R].
Tridiagonal assemble(const OperatorSpec& spec, double R, int intervals);

/// Number of eigenvalues of the matrix below `lambda` (Sturm sequence).
int count_below(const Tridiagonal& m, double lambda);

/// Lowest `count` eigenvalues of one matrix, ascending.
std::vector<double> matrix_eigenvalues(const Tridiagonal& m, int count);

/// Lowest `count` eigenpairs; vectors are unit-norm in the discrete l^2 sense.
struct EigenPairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};
EigenPairs matrix_eigenpairs(const Tridiagonal& m, int count);

struct Discretization {
  double R = 0.0;
  int n = 0;  ///< intervals of the coarse grid; the fine grid has 2n
  std::string scheme = "three_point_liouville";
  std::vector<double> eigs;        ///< Richardson-extrapolated
  std::vector<double> tolerance;   ///< |lambda_{2n} - lambda_n| / 3 per eigenvalue
  std::vector<double> coarse, fine;
};

/// Smallest R with mu^2 R^2 >= 4 lambda, and at least `r_min`.
double guard_radius(const OperatorSpec& spec, double lambda, double r_min = 0.0);

struct FdOptions {
  double resolution = 0.12;  ///< h sqrt(lambda_count) on the coarse grid must stay below this
  bool auto_scale = true;    ///< grow R and n to satisfy the guards instead of throwing
};

/// Lowest `count` eigenvalues of H, Richardson-extrapolated over (n, 2n). Throws
/// TruncationError (carrying the radius needed) when R or n is too small and
/// auto_scale is off.
Discretization fd_eigenvalues(const OperatorSpec& spec, double R, int n, int count,
                              const FdOptions& opt = {});

/// sqrt(lambda) log(lambda) / (2 pi).
double weyl_leading(double lambda);
/// (sqrt(lambda) / pi) (log(2 sqrt(lambda) / (mu a)) - 1), the phase-space volume.
double weyl_refined(double lambda, double mu_a);

struct WeylSample {
  double lambda;
  int count;      ///< N(lambda): eigenvalues <= lambda
  double model;   ///< weyl_leading(lambda)
  double refined; ///< weyl_refined(lambda, mu a)
};

struct WeylCheck {
  std::vector<WeylSample> samples;
  Discretization disc;
  double ratio_at_max;  ///< N(lambda_max) / weyl_leading(lambda_max)
};

/// Counting function from certified eigenvalues up to `lambda_max`, sampled on a geometric
/// grid of `points` values in [lambda_1, lambda_max].
WeylCheck weyl_check(const OperatorSpec& spec, double lambda_max, int points = 60);

struct TailEstimate {
  double value;
  double error;
};

/// sum_{lambda_n > cut} log(1 + z / lambda_n) from the refined Weyl density, with the
/// half-step correction at `cut` (taken to be the last retained eigenvalue).
TailEstimate fredholm_tail(const std::vector<double>& eigs, double z, double lambda_cut,
                           double mu_a = 1.0);

}  // namespace cuspdet::spectral
