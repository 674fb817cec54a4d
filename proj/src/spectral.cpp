#include "cuspdet/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>
#include <numbers>
#include <string>

#include "cuspdet/errors.hpp"
#include "cuspdet/log.hpp"
#include "cuspdet/quadrature.hpp"
#include "cuspdet/regfit.hpp"

namespace cuspdet::spectral {

Tridiagonal assemble(const OperatorSpec& spec, double R, int intervals) {
  spec.validate();
  if (!(R > spec.a)) throw DomainError("assemble: R must exceed a");
  if (intervals < 4) throw DomainError("assemble: need at least 4 intervals");
  const double s0 = std::log(spec.a), h = (std::log(R) - s0) / intervals, ih2 = 1.0 / (h * h);
  const double mu2 = spec.mu * spec.mu;
  const bool dir = spec.bc.is_dirichlet();
  Tridiagonal m;
  m.h = h;
  for (int i = dir ? 1 : 0; i < intervals; ++i) {
    const double s = s0 + i * h, x = std::exp(s);
    m.s.push_back(s);
    m.diag.push_back(2.0 * ih2 + mu2 * x * x + spec.potential(x));
  }
  m.off.assign(m.diag.size() - 1, -ih2);
  if (!dir) {
    // Ghost node from u' + beta u = 0, symmetrized by scaling the boundary unknown by 1/sqrt(2).
    const double beta = spec.bc.alpha * spec.a - 0.5;
    m.diag[0] -= 2.0 * beta / h;
    m.off[0] = -std::numbers::sqrt2 * ih2;
  }
  return m;
}

int count_below(const Tridiagonal& m, double lambda) {
  const double tiny = 1e-300;
  int c = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < m.diag.size(); ++i) {
    const double e2 = i ? m.off[i - 1] * m.off[i - 1] : 0.0;
    q = m.diag[i] - lambda - (i ? e2 / q : 0.0);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++c;
  }
  return c;
}

namespace {

struct Raw {
  std::vector<double> w;
  std::vector<lapack_int> iblock, isplit;
};

Raw stebz(const Tridiagonal& m, int count) {
  const auto n = static_cast<lapack_int>(m.diag.size());
  if (count < 1 || count > n) throw DomainError("eigenvalues: count out of range");
  Raw r;
  r.w.resize(n);
  r.iblock.resize(n);
  r.isplit.resize(n);
  lapack_int found = 0, nsplit = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, 1, count, abstol, m.diag.data(), m.off.data(),
                                         &found, &nsplit, r.w.data(), r.iblock.data(), r.isplit.data());
  if (info != 0 || found != count)
    throw NumericalError("eigenvalues: dstebz failed (info " + std::to_string(info) + ")");
  r.w.resize(count);
  return r;
}

}  // namespace

std::vector<double> matrix_eigenvalues(const Tridiagonal& m, int count) { return stebz(m, count).w; }

EigenPairs matrix_eigenpairs(const Tridiagonal& m, int count) {
  const Raw r = stebz(m, count);
  const auto n = static_cast<lapack_int>(m.diag.size());
  std::vector<double> z(static_cast<std::size_t>(n) * count);
  std::vector<lapack_int> ifail(count);
  const lapack_int info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, m.diag.data(), m.off.data(), count, r.w.data(),
                                         r.iblock.data(), r.isplit.data(), z.data(), n, ifail.data());
  if (info != 0) throw NumericalError("eigenpairs: dstein failed (info " + std::to_string(info) + ")");
  EigenPairs out{r.w, {}};
  for (int k = 0; k < count; ++k) out.vectors.emplace_back(z.begin() + k * n, z.begin() + (k + 1) * n);
  return out;
}

double guard_radius(const OperatorSpec& spec, double lambda, double r_min) {
  return std::max(r_min, 2.0 * std::sqrt(std::max(lambda, 0.0)) / spec.mu);
}

Discretization fd_eigenvalues(const OperatorSpec& spec, double R, int n, int count, const FdOptions& opt) {
  if (count < 1) throw DomainError("fd_eigenvalues: count must be >= 1");
  Discretization d;
  d.R = R;
  d.n = n;
  for (int round = 0;; ++round) {
    const Tridiagonal m = assemble(spec, d.R, d.n);
    if (static_cast<int>(m.diag.size()) < count)
      throw DomainError("fd_eigenvalues: grid has fewer unknowns than requested eigenvalues");
    d.coarse = matrix_eigenvalues(m, count);
    const double top = std::max(d.coarse.back(), 1.0);
    const double r_need = guard_radius(spec, top);
    const double res = m.h * std::sqrt(top);
    if (d.R >= r_need && res <= opt.resolution) break;
    if (!opt.auto_scale) {
      if (d.R < r_need)
        throw TruncationError("fd_eigenvalues: mu^2 R^2 < 4 lambda_" + std::to_string(count) +
                                  "; need R >= " + std::to_string(r_need),
                              r_need);
      throw NumericalError("fd_eigenvalues: h sqrt(lambda) = " + std::to_string(res) + " above " +
                           std::to_string(opt.resolution) + "; increase n");
    }
    if (round > 20) throw NumericalError("fd_eigenvalues: guards not met after rescaling");
    // Grow R with 10% slack, then choose n for the step the resolution guard asks for.
    const double r_new = std::max(d.R, 1.1 * r_need);
    const double h_new = std::min(m.h, 0.9 * opt.resolution / std::sqrt(top));
    const int n_new = static_cast<int>(std::ceil((std::log(r_new) - std::log(spec.a)) / h_new));
    logger()->info("fd_eigenvalues: rescaling (R, n) = ({}, {}) -> ({}, {})", d.R, d.n, r_new, n_new);
    d.R = r_new;
    d.n = std::max(n_new, d.n);
  }
  d.fine = matrix_eigenvalues(assemble(spec, d.R, 2 * d.n), count);
  d.eigs.resize(count);
  d.tolerance.resize(count);
  for (int k = 0; k < count; ++k) {
    d.eigs[k] = (4.0 * d.fine[k] - d.coarse[k]) / 3.0;
    d.tolerance[k] = std::abs(d.fine[k] - d.coarse[k]) / 3.0;
  }
  for (int k = 1; k < count; ++k)
    if (!(d.eigs[k] > d.eigs[k - 1])) throw NumericalError("fd_eigenvalues: extrapolated spectrum not increasing");
  return d;
}

double weyl_leading(double lambda) { return std::sqrt(lambda) * std::log(lambda) / (2.0 * std::numbers::pi); }

double weyl_refined(double lambda, double mu_a) {
  const double r = std::sqrt(lambda);
  return r / std::numbers::pi * (std::log(2.0 * r / mu_a) - 1.0);
}

WeylCheck weyl_check(const OperatorSpec& spec, double lambda_max, int points) {
  if (!(lambda_max > 1.0)) throw DomainError("weyl_check: lambda_max must exceed 1");
  const double mu_a = spec.mu * spec.a;
  int count = static_cast<int>(std::ceil(1.2 * std::max(weyl_refined(lambda_max, mu_a), 0.0))) + 10;
  Discretization d;
  for (;;) {
    d = fd_eigenvalues(spec, std::max(40.0 / spec.mu, 2.0 * spec.a), 8000, count);
    if (d.eigs.back() > lambda_max) break;
    count = count * 3 / 2;
  }
  WeylCheck out{{}, d, 0.0};
  const double lo = std::min(d.eigs.front(), lambda_max / 2.0);
  for (double l : regfit::geometric_grid(lo, lambda_max, points)) {
    const int n = static_cast<int>(std::upper_bound(d.eigs.begin(), d.eigs.end(), l) - d.eigs.begin());
    out.samples.push_back({l, n, weyl_leading(l), weyl_refined(l, mu_a)});
  }
  out.ratio_at_max = out.samples.back().count / weyl_leading(lambda_max);
  return out;
}

TailEstimate fredholm_tail(const std::vector<double>& eigs, double z, double lambda_cut, double mu_a) {
  if (!(z > 0.0)) throw DomainError("fredholm_tail: z must be > 0");
  if (!(mu_a > 0.0)) throw DomainError("fredholm_tail: mu a must be > 0");
  if (!eigs.empty() && lambda_cut < eigs.back() * (1.0 - 1e-12))
    throw DomainError("fredholm_tail: cut below the last retained eigenvalue");
  if (!(lambda_cut > 1.0)) throw DomainError("fredholm_tail: cut must exceed 1");
  // lambda = cut / u^2 turns the lambda^{-3/2} log(lambda) decay into a log singularity at u = 0.
  const double rc = std::sqrt(lambda_cut);
  const double body =
      quad::integrate(
          [&](double u) {
            if (u <= 0.0) return 0.0;
            return std::log1p(z * u * u / lambda_cut) * std::log(2.0 * rc / (u * mu_a)) * rc /
                   (std::numbers::pi * u * u);
          },
          0.0, 1.0, 1e-12)
          .value;
  // The counting function jumps by one at the cut; the smooth density sits half a step above it.
  const double step = std::log1p(z / lambda_cut);
  return {body - 0.5 * step, 0.5 * step};
}

}  // namespace cuspdet::spectral
