#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>
#include <boost/math/special_functions/gamma.hpp>

#include "subdiff/laplace/identities.hpp"
#include "subdiff/laplace/lemma.hpp"
#include "subdiff/laplace/transform.hpp"
#include "subdiff/numerics/quadrature.hpp"

using namespace subdiff;

namespace {

AnalyticFunction exp_decay() { return {[](double t) { return std::exp(-t); }, {1.0, 0.0}, {}, 0.0}; }
AnalyticFunction unit_box() { return {[](double t) { return t <= 1.0 ? 1.0 : 0.0; }, {1.0, 0.0}, {1.0}, 0.0}; }

}  // namespace

TEST(Quadrature, SmoothAndInfiniteIntervals) {
  EXPECT_NEAR(quad::adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-14);
  EXPECT_NEAR(quad::adaptive([](double x) { return std::exp(-x * x); }, 0.0, std::numeric_limits<double>::infinity()),
              0.5 * std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_NEAR(quad::adaptive([](double x) { return x; }, 1.0, 0.0), -0.5, 1e-15);
}

TEST(Quadrature, WeightedEndpointSingularities) {
  // int_0^1 (1 - t)^-1/2 = 2 and int_0^1 t^-0.75 = 4
  EXPECT_NEAR(quad::right_weighted([](double) { return 1.0; }, 0.0, 1.0, 0.5), 2.0, 1e-13);
  EXPECT_NEAR(quad::left_weighted([](double) { return 1.0; }, 0.0, 1.0, 0.75), 4.0, 1e-13);
  EXPECT_NEAR(quad::left_singular([](double t) { return std::pow(t, -0.75) * std::exp(-t); }, 0.0, 1.0, 0.75),
              boost::math::tgamma_lower(0.25, 1.0), 1e-12);
}

TEST(Transform, ClosedFormOracles) {
  for (double s : {0.25, 1.0, 4.0}) {
    EXPECT_NEAR(laplace_transform(exp_decay(), s), 1.0 / (1.0 + s), 1e-12);
    EXPECT_NEAR(laplace_transform(unit_box(), s), -std::expm1(-s) / s, 1e-12);
    AnalyticFunction sq{[](double t) { return t * t; }, {1.0, 2.0}, {}, 0.0};
    EXPECT_NEAR(laplace_transform(sq, s) * s * s * s, 2.0, 1e-10);
    for (double alpha : {0.25, 0.5, 0.75}) {
      AnalyticFunction p{[alpha](double t) { return std::pow(t, alpha - 1.0); }, {1.0, alpha - 1.0}, {}, 1.0 - alpha};
      const double exact = std::tgamma(alpha) * std::pow(s, -alpha);
      EXPECT_NEAR(laplace_transform(p, s), exact, 1e-11 * exact);
    }
  }
}

TEST(Transform, SampledFunctionOfLinearData) {
  // f(t) = t on [0, 10], zero afterwards: (1 - e^{-10 s}(1 + 10 s)) / s^2
  SampledFunction f{{0.0, 2.0, 10.0}, {0.0, 2.0, 10.0}, std::nullopt};
  const double s = 0.7;
  EXPECT_NEAR(laplace_transform(f, s), (1.0 - std::exp(-10.0 * s) * (1.0 + 10.0 * s)) / (s * s), 1e-12);
  SampledFunction bad{{0.5, 1.0}, {1.0, 1.0}, std::nullopt};
  EXPECT_THROW(laplace_transform(bad, 1.0), std::invalid_argument);
}

TEST(Transform, GrowthBeyondExponentialIsDivergence) {
  AnalyticFunction grow{[](double t) { return std::exp(2.0 * t); }, {1.0, 0.0}, {}, 0.0};
  EXPECT_THROW(laplace_transform(grow, 1.0), DivergenceError);
  EXPECT_THROW(laplace_transform(exp_decay(), 0.0), std::domain_error);
}

TEST(Identities, GammaOfOneMinusAlpha) {
  for (double alpha : {0.1, 0.25, 0.5, 0.75, 0.9})
    EXPECT_NEAR(gamma_alpha(alpha), std::tgamma(1.0 - alpha), 1e-12 * std::tgamma(1.0 - alpha));
}

TEST(Identities, MemoryIntegralOfConstant) {
  const AnalyticFunction one{[](double) { return 1.0; }, {1.0, 0.0}, {}, 0.0};
  for (double alpha : {0.25, 0.5, 0.75})
    for (double t : {0.3, 1.0, 5.0})
      EXPECT_NEAR(memory_integral(one, alpha, t), std::pow(t, 1.0 - alpha) / (1.0 - alpha), 1e-12);
}

TEST(Identities, FundamentalTransformPairs) {
  for (double alpha : {0.25, 0.5, 0.75})
    for (double s : {0.25, 1.0, 4.0})
      for (const auto& P : {exp_decay(), unit_box()}) {
        EXPECT_LT(verify_fund_laplace(P, alpha, s).residual, 1e-10) << alpha << " " << s;
        EXPECT_LT(verify_fund_laplace2(P, alpha, s).residual, 1e-10) << alpha << " " << s;
      }
}

TEST(Identities, DerivativeRuleForTimesExponential) {
  const AnalyticFunction f{[](double t) { return t * std::exp(-t); }, {1.0, 0.0}, {}, 0.0};
  const AnalyticFunction fp{[](double t) { return (1.0 - t) * std::exp(-t); }, {1.0, 1.0}, {}, 0.0};
  for (double s : {0.5, 1.0, 2.0}) {
    const auto r = derivative_rule(f, fp, s);
    EXPECT_LT(r.residual, 1e-10);
    EXPECT_NEAR(r.rhs, s / ((1.0 + s) * (1.0 + s)), 1e-12);
  }
}

TEST(Identities, ScalingRuleIsGammaAlpha) {
  for (double alpha : {0.25, 0.5, 0.75})
    for (double s : {0.01, 0.25, 1.0, 4.0, 100.0})
      EXPECT_NEAR(scaling_rule_value(alpha, s), std::tgamma(alpha), 1e-10 * std::tgamma(alpha));
}

TEST(Lemma, PowerLawSatisfiesBothBounds) {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const AnalyticFunction u{[alpha](double t) { return std::pow(t, alpha - 1.0); }, {1.0, alpha - 1.0}, {},
                             1.0 - alpha};
    const double eps = 0.5 * (1.0 - alpha);
    const auto r = lemma_integral_bounds(u, alpha, eps);
    EXPECT_TRUE(r.precondition_ok);
    EXPECT_NEAR(r.k_lower, std::tgamma(alpha), 1e-8);
    EXPECT_NEAR(r.k_upper, std::tgamma(alpha), 1e-8);
    // int_1^inf t^(-1-eps) = 1 / eps
    EXPECT_NEAR(r.upper_lhs, 1.0 / eps, 1e-8 / eps);
    EXPECT_TRUE(r.upper_holds);
    EXPECT_TRUE(r.lower_holds);
  }
}

TEST(Lemma, SampledAndAnalyticAgree) {
  const double alpha = 0.5, eps = 0.2;
  const AnalyticFunction u{[](double t) { return std::pow(1.0 + t, -0.5); }, {1.0, -0.5}, {}, 0.0};
  SampledFunction s;
  for (int i = 0; i <= 4000; ++i) {
    const double t = i == 0 ? 0.0 : std::pow(10.0, -4.0 + 8.0 * i / 4000.0);
    s.t.push_back(t);
    s.values.push_back(std::pow(1.0 + t, -0.5));
  }
  s.tail_exponent = -0.5;
  const auto a = lemma_integral_bounds(u, alpha, eps);
  const auto b = lemma_integral_bounds(s, alpha, eps);
  EXPECT_NEAR(a.lower_lhs, b.lower_lhs, 1e-3 * a.lower_lhs);
  EXPECT_NEAR(a.upper_lhs, b.upper_lhs, 1e-3 * a.upper_lhs);
  EXPECT_EQ(a.holds(), b.holds());
}

TEST(Lemma, RejectsEpsilonOutsideRange) {
  const AnalyticFunction u{[](double t) { return std::exp(-t); }, {1.0, 0.0}, {}, 0.0};
  EXPECT_THROW(lemma_integral_bounds(u, 0.5, 0.5), std::domain_error);
  EXPECT_THROW(lemma_integral_bounds(u, 0.5, 0.0), std::domain_error);
}
