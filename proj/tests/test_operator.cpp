#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cuspdet/bessel.hpp"
#include "cuspdet/errors.hpp"
#include "cuspdet/operator.hpp"

using namespace cuspdet;

namespace {

OperatorSpec spec_of(double a, double mu, BoundaryCondition bc = BoundaryCondition::dirichlet(),
                     Potential v = Potential::zero()) {
  OperatorSpec s;
  s.a = a;
  s.mu = mu;
  s.bc = bc;
  s.potential = std::move(v);
  return s;
}

// c such that sqrt_exp(c) has integral of |V|/x^2 over [a, inf) equal to target.
Potential sqrt_exp_with_l1(double target, double a) {
  const double unit = Potential::sqrt_exp(1.0).w_l1(a);
  return Potential::sqrt_exp(target / unit);
}

double rel(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

}  // namespace

TEST(Potential, PresetsAndDecayCertificate) {
  const auto v = Potential::sqrt_exp(0.3);
  EXPECT_NEAR(v(2.0), 0.3 * std::sqrt(2.0) * std::exp(-2.0), 1e-16);
  EXPECT_DOUBLE_EQ(v.gamma(), 0.5);
  EXPECT_NO_THROW(v.validate(1.0));
  EXPECT_NEAR(Potential::inverse_power(2.0, 3.0).w_tail(2.0), 2.0 / (4.0 * 16.0), 1e-15);
  EXPECT_THROW(Potential::analytic("inverse_power", {{"c", 1.0}, {"p", 0.5}}, 0.4).validate(1.0), SpecError);
  EXPECT_THROW(Potential::analytic("sqrt_exp", {{"c", 1.0}, {"rate", 1.0}}, 2.5).validate(1.0), SpecError);
  EXPECT_THROW(Potential::analytic("nope", {}), SpecError);
  EXPECT_THROW(Potential::analytic("exp", {{"c", 1.0}}), SpecError);
}

TEST(Potential, TabulatedSplineAndZeroExtension) {
  std::vector<double> x, v;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(1.0 + 0.25 * i * i / 20.0);
    v.push_back(2.0 - 3.0 * x.back());
  }
  const auto p = Potential::tabulated(x, v, 3);
  for (double t : {1.0, 1.37, 2.2, 5.9, 6.0}) EXPECT_NEAR(p(t), 2.0 - 3.0 * t, 1e-12);
  EXPECT_EQ(p(0.5), 0.0);
  EXPECT_EQ(p(6.5), 0.0);
  const auto lin = Potential::tabulated({1.0, 2.0, 4.0}, {0.0, 1.0, 0.0}, 1);
  EXPECT_NEAR(lin(3.0), 0.5, 1e-15);
  EXPECT_THROW(Potential::tabulated({1.0, 1.0}, {0.0, 0.0}), SpecError);
  EXPECT_THROW(Potential::tabulated({1.0, 2.0}, {0.0}), SpecError);
}

TEST(Potential, SumForm) {
  const auto base = Potential::sqrt_exp(0.3);
  const auto dir = Potential::exp_decay(1.0, 2.0);
  const auto s = base.plus(dir, 0.01);
  EXPECT_NEAR(s(1.5), base(1.5) + 0.01 * dir(1.5), 1e-16);
  EXPECT_TRUE(Potential::zero().plus(dir, 0.0).is_zero());
}

TEST(BoundaryConditionTest, ThetaAlphaRoundTrip) {
  for (double th : {0.3, 1.0, std::numbers::pi / 2, 2.5}) {
    const auto bc = BoundaryCondition::from_theta(th);
    EXPECT_NEAR(bc.theta(), th, 1e-14);
    EXPECT_NEAR(bc.alpha, 1.0 / std::tan(th), 1e-12);
  }
  EXPECT_TRUE(BoundaryCondition::from_theta(0.0).is_dirichlet());
  EXPECT_THROW(BoundaryCondition::from_theta(4.0), SpecError);
}

TEST(OperatorSpecTest, ValidationNamesInvariant) {
  auto s = spec_of(0.0, 1.0);
  try {
    s.validate();
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("a must be > 0"), std::string::npos);
  }
  EXPECT_THROW(spec_of(1.0, -1.0).validate(), SpecError);
  EXPECT_NO_THROW(spec_of(1.0, 1.0).validate());
}

TEST(ModelSolutions, PsiNormalizationAndHalfOrder) {
  const auto s = spec_of(1.0, 1.0);
  const auto psi = model_psi(0.5, s);
  for (double x : {1.0, 2.5, 7.0}) {
    const auto [f, fp] = psi.eval(x);
    EXPECT_NEAR(f * std::sqrt(x) / bessel::bessel_k(0.5, x), 1.0, 1e-14);
    EXPECT_NEAR(f / (std::sqrt(std::numbers::pi / 2) * std::exp(-x) / x), 1.0, 1e-13);
    const double exact_fp = std::sqrt(std::numbers::pi / 2) * std::exp(-x) * (-1.0 / x - 1.0 / (x * x));
    EXPECT_NEAR(fp / exact_fp, 1.0, 1e-13);
  }
}

TEST(ModelSolutions, PhiBoundaryData) {
  for (double a : {0.5, 1.0, 2.0})
    for (double z : {0.0, 1.0, 7.5, 40.0}) {
      const auto phi = model_phi(z, spec_of(a, 1.3));
      const auto [f, fp] = phi.eval(a);
      EXPECT_EQ(f, 0.0);
      EXPECT_NEAR(fp * std::pow(a, 1.5), 1.0, 1e-13) << a << " " << z;
    }
  const auto phin = model_phi(1.0, spec_of(1.0, 1.0, BoundaryCondition::neumann(0.0)));
  const auto [f, fp] = phin.eval(1.0);
  EXPECT_NEAR(f, 1.0, 1e-14);
  EXPECT_NEAR(fp, 0.0, 1e-14);
  const auto phi2 = model_phi(2.0, spec_of(0.5, 2.0, BoundaryCondition::neumann(1.7)));
  const auto [g, gp] = phi2.eval(0.5);
  EXPECT_NEAR(g, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(gp + 1.7 * g, 0.0, 1e-13);
}

TEST(ModelSolutions, WronskianEqualsK) {
  for (double z : {0.0, 1.0, 3.3, 25.0}) {
    const auto s = spec_of(1.0, 1.0);
    const auto psi = model_psi(z, s), phi = model_phi(z, s);
    const double k = bessel::bessel_k(z, 1.0);
    for (double x : {1.0, 1.5, 4.0, 20.0, 60.0}) EXPECT_NEAR(wronskian(psi, phi, x) / k, 1.0, 1e-11);
    EXPECT_EQ(wronskian(psi, psi, 2.0), 0.0);
  }
}

TEST(ModelSolutions, DirichletPhiPositive) {
  const auto s = spec_of(1.0, 2.0);
  for (double z : {0.0, 2.0, 30.0}) {
    const auto phi = model_phi(z, s);
    for (double x = 1.001; x < 30.0; x *= 1.3) EXPECT_GT(phi.eval_scaled(x).f, 0.0);
  }
}

TEST(ModelSolutions, NeumannEigenvalueGuard) {
  const double z = 1.0, mu = 1.0, a = 1.0;
  const auto lp = bessel::log_pair(z, mu * a);
  const double alpha = 0.5 / a - mu * lp.dlog_k;  // psi itself satisfies the condition
  EXPECT_THROW(model_phi(z, spec_of(a, mu, BoundaryCondition::neumann(alpha))), EigenvalueProximity);
}

TEST(SolvePhi, MatchesClosedFormWhenVZero) {
  for (auto bc : {BoundaryCondition::dirichlet(), BoundaryCondition::neumann(0.0), BoundaryCondition::neumann(1.0)})
    for (double z : {0.0, 0.5, 3.0, 30.0}) {
      const auto s = spec_of(1.0, 1.0, bc);
      const auto ode = solve_phi(s, z);
      const auto ref = model_phi(z, s);
      const double hi = std::min(ode.valid_interval().second, 6.0);
      for (double x = 1.0; x <= hi; x += (hi - 1.0) / 37.0) {
        const auto e1 = ode.eval_scaled(x), e2 = ref.eval_scaled(x);
        const double v1 = e1.f, v2 = e2.f * std::exp(e2.log_scale - e1.log_scale);
        const double d1 = e1.fp, d2 = e2.fp * std::exp(e2.log_scale - e1.log_scale);
        if (x > 1.0 || !bc.is_dirichlet()) EXPECT_LT(rel(v1, v2), 1e-9) << z << " " << x;
        EXPECT_LT(std::abs(d1 - d2), 1e-9 * std::abs(d2) + 1e-12 * std::abs(v2)) << z << " " << x;
      }
    }
}

TEST(SolvePhi, BoundaryDataExact) {
  const auto sd = spec_of(0.5, 2.0, BoundaryCondition::dirichlet(), Potential::sqrt_exp(0.3));
  const auto [f, fp] = solve_phi(sd, 1.0).eval(0.5);
  EXPECT_EQ(f, 0.0);
  EXPECT_DOUBLE_EQ(fp, std::pow(0.5, -1.5));
  const auto sn = spec_of(0.5, 2.0, BoundaryCondition::neumann(0.7), Potential::sqrt_exp(0.3));
  const auto [g, gp] = solve_phi(sn, 1.0).eval(0.5);
  EXPECT_DOUBLE_EQ(g, std::sqrt(2.0));
  EXPECT_NEAR(gp + 0.7 * g, 0.0, 1e-15);
}

TEST(SolvePsi, ZeroPotentialIsExactlyPsi) {
  const auto s = spec_of(1.0, 1.5);
  const auto h = solve_psi(s, 2.0);
  const auto m = model_psi(2.0, s);
  EXPECT_EQ(h.diagnostics().volterra_terms_used, 0);
  for (double x : {1.0, 3.0, 10.0}) {
    const auto e1 = h.eval_scaled(x), e2 = m.eval_scaled(x);
    EXPECT_EQ(e1.f, e2.f);
    EXPECT_EQ(e1.fp, e2.fp);
    EXPECT_EQ(e1.log_scale, e2.log_scale);
  }
}

TEST(SolvePsi, PerturbedTendsToModel) {
  const auto s = spec_of(1.0, 1.0, BoundaryCondition::dirichlet(), Potential::sqrt_exp(1.0));
  const auto h = solve_psi(s, 1.0);
  const double tb = h.diagnostics().tail_bound;
  double prev = INFINITY;
  for (double x : {2.0, 5.0, 10.0, 20.0}) {
    const double dev = std::abs(h.eval_scaled(x).f - 1.0);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-8);
  EXPECT_LT(tb, 1e-11);
}

TEST(SolvePsi, FactorialEnvelopeAndIterationCount) {
  for (double l1 : {0.05, 0.1, 0.2, 0.5}) {
    const auto s = spec_of(1.0, 1.0, BoundaryCondition::dirichlet(), sqrt_exp_with_l1(l1, 1.0));
    const auto h = solve_psi(s, 1.0);
    const auto& d = h.diagnostics();
    EXPECT_TRUE(d.envelope_ok);
    EXPECT_NEAR(d.w_l1, l1, 1e-8);
    EXPECT_LE(d.kernel_bound, 2.0);
    for (std::size_t n = 0; n < d.increments.size(); ++n) EXPECT_LE(d.increments[n], 1.01 * d.envelope[n] + 1e-15);
    if (l1 == 0.1) EXPECT_LE(d.volterra_terms_used, 8);
  }
}

TEST(SolvePsi, LimitPointUniqueness) {
  const auto s = spec_of(1.0, 1.0, BoundaryCondition::neumann(0.5), Potential::sqrt_exp(0.3));
  SolverOptions o1, o2;
  const double x = select_x_max(s, 1.0);
  o1.x_max = x;
  o2.x_max = 2 * x;
  const auto h1 = solve_psi(s, 1.0, o1), h2 = solve_psi(s, 1.0, o2);
  for (double t : {1.0, 2.0, 5.0, 0.9 * x}) {
    EXPECT_LT(rel(h1.eval_scaled(t).f, h2.eval_scaled(t).f), 1e-8);
    EXPECT_LT(rel(h1.eval_scaled(t).fp, h2.eval_scaled(t).fp), 1e-8);
  }
}

TEST(Wronskian, PerturbedPairConstant) {
  for (double z : {0.0, 1.0, 12.0}) {
    const auto s = spec_of(1.0, 1.0, BoundaryCondition::neumann(1.0), Potential::sqrt_exp(0.3));
    const auto psi = solve_psi(s, z), phi = solve_phi(s, z);
    const double hi = phi.valid_interval().second;
    const double w0 = wronskian_scaled(psi, phi, 1.0).log_abs();
    double lo = INFINITY, up = -INFINITY;
    for (int i = 0; i < 50; ++i) {
      const double x = 1.0 + (hi - 1.0) * i / 49.0;
      const double r = std::exp(wronskian_scaled(psi, phi, x).log_abs() - w0);
      lo = std::min(lo, r);
      up = std::max(up, r);
    }
    EXPECT_LT(up - lo, 1e-8) << z;
  }
}

TEST(Wronskian, ReductionOfOrderPairIsOne) {
  const auto s = spec_of(1.0, 1.0, BoundaryCondition::dirichlet(), Potential::sqrt_exp(0.3));
  for (double z : {0.5, 4.0}) {
    const auto h1 = solve_psi(s, z), h2 = solve_h2(s, z);
    const double hi = select_x_max(s, z);
    for (int i = 0; i <= 30; ++i) {
      const double x = 1.0 + (1.2 * hi - 1.0) * i / 30.0;
      EXPECT_NEAR(wronskian(h1, h2, x), 1.0, 1e-8) << x;
    }
  }
}

TEST(Wronskian, RejectsMismatch) {
  const auto s = spec_of(1.0, 1.0);
  EXPECT_THROW(wronskian(model_psi(1.0, s), model_psi(2.0, s), 2.0), DomainError);
  const auto phi = solve_phi(s, 1.0);
  EXPECT_THROW(wronskian(model_psi(1.0, s), phi, phi.valid_interval().second + 1.0), DomainError);
}

TEST(XMax, TruncationErrorCarriesSuggestion) {
  const auto s = spec_of(1.0, 1.0, BoundaryCondition::dirichlet(), Potential::inverse_power(1.0, 1.5));
  try {
    select_x_max(s, 1.0);
    FAIL();
  } catch (const TruncationError& e) {
    EXPECT_GT(e.suggested(), 1e3);
  }
}
