#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cuspdet/bessel.hpp"
#include "cuspdet/detz.hpp"
#include "cuspdet/errors.hpp"
#include "cuspdet/quadrature.hpp"
#include "cuspdet/spectral.hpp"

using namespace cuspdet;

namespace {

OperatorSpec spec_of(double a, double mu, double nu, BoundaryCondition bc = BoundaryCondition::dirichlet(),
                     Potential v = Potential::zero()) {
  OperatorSpec s;
  s.a = a;
  s.mu = mu;
  s.nu = nu;
  s.bc = bc;
  s.potential = std::move(v);
  return s;
}

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

TEST(DetzWronskian, ModelDirichletIsBesselK) {
  // K_1(1), frozen from the series oracle.
  const double k11 = 0.60190723019723457474;
  const auto r = detz::detz_wronskian(spec_of(1.0, 1.0, 1.0));
  EXPECT_NEAR(r.value / (kSqrt2OverPi * k11), 1.0, 1e-10);
  EXPECT_EQ(r.method, detz::Method::wronskian);
  EXPECT_FALSE(r.diagnostics.zero);
  for (double mu : {0.5, 2.0})
    for (double nu : {0.0, 2.5}) {
      const auto s = spec_of(0.5, mu, nu);
      EXPECT_NEAR(detz::detz_wronskian(s).value / (kSqrt2OverPi * bessel::bessel_k(nu, mu * 0.5)), 1.0, 1e-9);
    }
}

TEST(DetzWronskian, ModelNeumannIsLambdaTimesK) {
  for (double alpha : {0.0, 1.0, 2.5}) {
    const auto s = spec_of(1.0, 1.0, 1.0, BoundaryCondition::neumann(alpha));
    const double lam = detz::dirichlet_neumann_ratio(s, alpha, 1.0);
    const double k = bessel::bessel_k(1.0, 1.0), kp = bessel::bessel_k_prime(1.0, 1.0);
    // psi = x^{-1/2} K(mu x): psi'/psi = -1/(2a) + mu K'/K.
    EXPECT_NEAR(lam, -(alpha - 0.5 + kp / k), 1e-12);
    EXPECT_NEAR(detz::detz_wronskian(s).value / (kSqrt2OverPi * lam * k), 1.0, 1e-9);
  }
}

TEST(DetzWronskian, ClosedFormsAndSolversAgree) {
  detz::DetOptions closed;
  closed.closed_forms = true;
  for (auto bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(0.0), BoundaryCondition::neumann(1.0)})
    for (double nu : {0.5, 3.0}) {
      const auto s = spec_of(1.0, 1.5, nu, bc);
      EXPECT_NEAR(detz::detz_wronskian(s).log_value, detz::detz_wronskian(s, closed).log_value, 1e-9);
    }
  EXPECT_THROW(detz::detz_wronskian(spec_of(1.0, 1.0, 1.0, {}, Potential::sqrt_exp(0.3)), closed), SpecError);
}

TEST(DetzWronskian, VanishingWronskianGivesZero) {
  const double nu = 1.0;
  const auto lp = bessel::log_pair(nu, 1.0);
  const double alpha = 0.5 - lp.dlog_k;  // psi_nu itself satisfies the boundary condition
  const auto r = detz::detz_wronskian(spec_of(1.0, 1.0, nu, BoundaryCondition::neumann(alpha), Potential::sqrt_exp(0.0)));
  EXPECT_TRUE(r.diagnostics.zero);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(std::isinf(r.log_value));
}

TEST(DetzWronskian, LogRatioAdditivity) {
  const auto base = spec_of(1.0, 1.0, 0.0, BoundaryCondition::neumann(1.0), Potential::sqrt_exp(0.3));
  auto ld = [&](double nu) {
    auto s = base;
    s.nu = nu;
    return detz::detz_wronskian(s).log_value;
  };
  const double l0 = ld(0.5), l1 = ld(1.7), l2 = ld(4.0);
  EXPECT_NEAR(l2 - l0, (l2 - l1) + (l1 - l0), 1e-8);
}

TEST(DetzTraceIntegral, ModelMatchesWronskian) {
  const auto s = spec_of(1.0, 1.0, 1.0);
  const auto t = detz::detz_trace_integral(s);
  EXPECT_EQ(t.method, detz::Method::trace_integral);
  EXPECT_NEAR(t.value / detz::detz_wronskian(s).value, 1.0, 1e-4);
  EXPECT_LT(t.diagnostics.fit_residual, 1e-9);
}

TEST(DetzTraceIntegral, PerturbedMatchesWronskian) {
  const auto s = spec_of(1.0, 1.0, 1.0, BoundaryCondition::dirichlet(), Potential::sqrt_exp(0.3));
  EXPECT_NEAR(detz::detz_trace_integral(s).value / detz::detz_wronskian(s).value, 1.0, 1e-3);
}

TEST(DetzTraceIntegral, OrdinaryRatioIntegral) {
  for (auto v : {Potential::zero(), Potential::sqrt_exp(0.3)}) {
    auto s0 = spec_of(1.0, 1.0, 0.5, BoundaryCondition::neumann(0.0), v), s1 = s0;
    s1.nu = 3.0;
    const double w = detz::detz_wronskian(s1).log_value - detz::detz_wronskian(s0).log_value;
    EXPECT_NEAR(detz::log_ratio_trace(s0, 0.5, 3.0), w, 1e-5);
  }
}

TEST(LimLogWronskian, ConstantIsUniversal) {
  const double target = 0.5 * std::log(std::numbers::pi / 2.0);
  for (auto bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(0.0), BoundaryCondition::neumann(1.0)})
    EXPECT_NEAR(detz::lim_log_wronskian(spec_of(1.0, 1.0, 1.0, bc)).value, target, 1e-4);
  EXPECT_NEAR(detz::lim_log_wronskian(spec_of(0.5, 2.0, 1.0)).value, target, 1e-4);
}

TEST(DirichletNeumannRatio, LinearInAlpha) {
  const auto s = spec_of(0.7, 1.3, 2.0, BoundaryCondition::dirichlet(), Potential::sqrt_exp(0.3));
  const double l0 = detz::dirichlet_neumann_ratio(s, 0.0, 2.0), l1 = detz::dirichlet_neumann_ratio(s, 1.0, 2.0);
  EXPECT_NEAR(l1 - l0, -0.7, 1e-12);
}

TEST(DirichletNeumannRatio, EqualsDeterminantRatio) {
  for (double alpha : {0.0, 1.0}) {
    const auto d = spec_of(1.0, 1.0, 1.0, BoundaryCondition::dirichlet(), Potential::sqrt_exp(0.3));
    auto n = d;
    n.bc = BoundaryCondition::neumann(alpha);
    const double ratio = std::exp(detz::detz_wronskian(n).log_value - detz::detz_wronskian(d).log_value);
    EXPECT_NEAR(ratio / detz::dirichlet_neumann_ratio(d, alpha, 1.0), 1.0, 1e-8);
  }
}

TEST(DirichletNeumannRatio, GrowsLikeNu) {
  const auto s = spec_of(1.0, 1.0, 0.0);
  double prev = INFINITY;
  for (double nu : {50.0, 200.0, 800.0}) {
    const double dev = std::abs(detz::dirichlet_neumann_ratio(s, 0.0, nu) / nu - 1.0);
    EXPECT_LT(dev, prev);
    EXPECT_LT(dev, 1.0 / nu);
    prev = dev;
  }
}

TEST(VariationCheck, ZeroDirection) {
  const auto v = detz::variation_check(spec_of(1.0, 1.0, 1.0), Potential::zero());
  EXPECT_EQ(v.lhs, 0.0);
  EXPECT_EQ(v.rhs, 0.0);
  EXPECT_EQ(v.green, 0.0);
}

TEST(VariationCheck, ThreeRoutesAgree) {
  const auto v = detz::variation_check(spec_of(1.0, 1.0, 1.0), Potential::sqrt_exp(1.0), 1e-3);
  EXPECT_NEAR(v.lhs, v.rhs, 1e-4);
  EXPECT_NEAR(v.rhs, v.green, 1e-5);
  EXPECT_GT(v.green, 0.0);
}

TEST(DerivativeIdentity, PsiNormFromLambdaSlope) {
  // int_a^inf psi^2 = a psi(a)^2 / (2 z) d lambda_alpha / dz, from the Wronskian of psi and d psi / dz.
  for (auto v : {Potential::zero(), Potential::sqrt_exp(0.3)}) {
    const auto s = spec_of(1.0, 1.0, 0.0, BoundaryCondition::dirichlet(), v);
    const double z = 1.5, h = 1e-4;
    const double dl = (detz::dirichlet_neumann_ratio(s, 0.0, z + h) - detz::dirichlet_neumann_ratio(s, 0.0, z - h)) / (2 * h);
    const Solution psi = solve_psi(s, z);
    const double end = psi.valid_interval().second;
    const double norm = quad::integrate(
                            [&](double x) {
                              const auto e = psi.eval_scaled(x);
                              return e.f * e.f * std::exp(2.0 * e.log_scale);
                            },
                            1.0, end, 1e-12)
                            .value;
    const double pa = psi.eval(1.0).first;
    EXPECT_NEAR(norm / (pa * pa * dl / (2 * z)), 1.0, 1e-6);
  }
}

TEST(FriedlanderCheck, TrivialShiftAndMonotone) {
  const auto s = spec_of(1.0, 1.0, 0.0);
  const auto eigs = spectral::fd_eigenvalues(s, 40.0, 4000, 60).eigs;
  const auto f0 = detz::friedlander_check(s, 0.0, eigs);
  EXPECT_EQ(f0.lhs, 1.0);
  EXPECT_EQ(f0.rhs, 1.0);
  double prev = 1.0;
  for (double z : {0.5, 1.0, 2.0, 4.0}) {
    const auto f = detz::friedlander_check(s, z, eigs);
    EXPECT_GT(f.lhs, prev);
    EXPECT_NEAR(f.lhs / f.rhs, 1.0, 1e-3);
    prev = f.lhs;
  }
}
