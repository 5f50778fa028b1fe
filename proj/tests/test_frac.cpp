#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "subdiff/frac/identities.hpp"
#include "subdiff/frac/memory.hpp"
#include "subdiff/frac/mittag_leffler.hpp"
#include "subdiff/frac/solvers.hpp"

using namespace subdiff;

namespace {

/// E_{1/2}(-x) = exp(x^2) erfc(x), evaluated in 50-digit arithmetic so large x does not overflow.
double ml_half_oracle(double x) {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big bx = x;
  return static_cast<double>(exp(bx * bx) * boost::math::erfc(bx));
}

/// Direct alternating series in 100-digit arithmetic; the largest terms stay below 1e50 for the tested range.
double ml_series_oracle(double alpha, double x) {
  using big = boost::multiprecision::cpp_bin_float_100;
  big sum = 1, term, peak = 0;
  for (int k = 1; k < 20000; ++k) {
    term = exp(k * log(big(x)) - boost::math::lgamma(big(alpha) * k + 1));
    sum += (k % 2 ? -term : term);
    if (term > peak) peak = term;
    if (term < peak && term < big(1e-40)) break;
  }
  return static_cast<double>(sum);
}

const PeriodicGrid kGrid{0.0, 2.0 * std::numbers::pi, 256};

double ml_mode_error(double alpha, double dt, double A = 1.0 / 6.0) {
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid);
  const auto sol = solve_subdiffusion(alpha, A, rho0, kGrid, dt, 1.0);
  const double a0 = cosine_mode(kGrid, rho0);
  const double expected = a0 * mittag_leffler(alpha, -sol.coefficient() / std::tgamma(1.0 - alpha));
  return std::abs(cosine_mode(kGrid, sol.rho.values.back()) - expected) / std::abs(expected);
}

}  // namespace

TEST(MittagLeffler, HalfOrderMatchesErfcOracle) {
  for (double x : {1e-6, 0.01, 0.3, 1.0, 2.5, 5.0, 12.0, 40.0, 100.0}) {
    const double o = ml_half_oracle(x);
    EXPECT_NEAR(mittag_leffler(0.5, -x), o, 1e-12 * o) << "x " << x;
  }
}

TEST(MittagLeffler, SeriesOracleAcrossOrders) {
  for (double alpha : {0.3, 0.7, 0.9})
    for (double x : {0.05, 0.5, 2.0, 4.0}) {
      const double o = ml_series_oracle(alpha, x);
      EXPECT_NEAR(mittag_leffler(alpha, -x), o, 1e-11 * std::abs(o)) << alpha << " " << x;
    }
}

TEST(MittagLeffler, SpecialValuesAndDomain) {
  EXPECT_DOUBLE_EQ(mittag_leffler(0.4, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(mittag_leffler(1.0, -2.0), std::exp(-2.0));
  EXPECT_DOUBLE_EQ(mittag_leffler(0.4, -INFINITY), 0.0);
  EXPECT_THROW(mittag_leffler(1.5, -1.0), std::domain_error);
  EXPECT_THROW(mittag_leffler(0.5, 1.0), std::domain_error);
  // completely monotone: decreasing in x
  double prev = 1.0;
  for (double x = 0.5; x < 50.0; x *= 1.5) {
    const double v = mittag_leffler(0.6, -x);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Memory, WeightsAreExactForPiecewiseLinear) {
  // f(t) = t: d/dt int_0^t s (t-s)^-alpha ds = t^(1-alpha) / (1-alpha)
  for (double alpha : {0.25, 0.5, 0.75}) {
    const double dt = 0.01;
    const MemoryWeights w(alpha, dt, 200);
    std::vector<double> f(201);
    for (std::size_t k = 0; k <= 200; ++k) f[k] = static_cast<double>(k) * dt;
    for (std::size_t k : {1u, 17u, 200u}) {
      const double t = static_cast<double>(k) * dt;
      EXPECT_NEAR(memory_operator(f, w, k), std::pow(t, 1.0 - alpha) / (1.0 - alpha), 1e-12);
    }
  }
}

TEST(Memory, ConstantHistoryWithJump) {
  // f = c constant from t = 0: the operator is c t^-alpha; a jump of size d at the first step adds d b_{k-1}
  const double alpha = 0.5, dt = 0.1, c = 2.0, d = 0.5;
  const MemoryWeights w(alpha, dt, 50);
  std::vector<double> f(51, c);
  for (std::size_t k = 1; k <= 50; ++k)
    EXPECT_NEAR(memory_operator(f, w, k), c * std::pow(static_cast<double>(k) * dt, -alpha), 1e-13);
  for (std::size_t k = 1; k <= 50; ++k) f[k] = c + d;
  for (std::size_t k : {1u, 10u, 50u}) {
    const double t = static_cast<double>(k) * dt;
    // jump linear over the first step: d/dt int of the ramp
    const double ramp = d / dt * (std::pow(t, 1.0 - alpha) - std::pow(t - dt, 1.0 - alpha)) / (1.0 - alpha);
    EXPECT_NEAR(memory_operator(f, w, k), c * std::pow(t, -alpha) + ramp, 1e-12);
  }
  EXPECT_THROW(memory_operator(f, w, 0), std::out_of_range);
}

TEST(Subdiffusion, MittagLefflerModeWithinOnePercent) {
  for (double alpha : {0.3, 0.5, 0.7}) EXPECT_LT(ml_mode_error(alpha, 1e-3), 0.01) << alpha;
}

TEST(Subdiffusion, HalvingTimeStepReducesError) {
  for (double alpha : {0.3, 0.7}) {
    const double coarse = ml_mode_error(alpha, 0.02, 1.0);
    const double fine = ml_mode_error(alpha, 0.01, 1.0);
    EXPECT_GE(coarse / fine, 1.5) << alpha;
  }
}

TEST(Subdiffusion, ConservesMass) {
  const auto sol = solve_subdiffusion(0.5, 1.0 / 6.0, SpatialProfile::gaussian(3.0, 0.4), kGrid, 1e-3, 0.5);
  const double m0 = total_mass(kGrid, sol.rho.values.front());
  for (const auto& r : sol.rho.values) ASSERT_NEAR(total_mass(kGrid, r), m0, 1e-10 * m0);
}

TEST(Subdiffusion, FirstStepStaysCloseToInitialData) {
  for (double alpha : {0.3, 0.5, 0.7}) {
    const auto rho0 = SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid);
    const auto sol = solve_subdiffusion(alpha, 1.0 / 6.0, rho0, kGrid, 1e-4, 1e-4);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < kGrid.cells; ++j) {
      num = std::max(num, std::abs(sol.rho.values[1][j] - rho0[j]));
      den = std::max(den, std::abs(rho0[j]));
    }
    EXPECT_LT(num / den, 0.05);
  }
}

TEST(Subdiffusion, NearUnitOrderApproachesDiffusion) {
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid);
  // Gamma(1 - alpha) blows up as alpha -> 1; scaling A by it keeps the limiting rate at m2 / 2
  const double A = std::tgamma(1.0 - 0.999) / 6.0;
  const auto sub = solve_subdiffusion(0.999, A, rho0, kGrid, 1e-3, 1.0);
  const auto dif = solve_diffusion(1.0, 1.0 / 6.0, rho0, kGrid, 1e-3, 1.0);
  const double a = cosine_mode(kGrid, sub.rho.values.back()), b = cosine_mode(kGrid, dif.values.back());
  EXPECT_NEAR(a, b, 0.02 * std::abs(b));
}

TEST(Diffusion, ExponentialModeDecay) {
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid);
  for (double d0 : {0.5, 1.0, 2.0}) {
    const auto h = solve_diffusion(d0, 1.0 / 6.0, rho0, kGrid, 1e-3, 1.0);
    const double expected = cosine_mode(kGrid, rho0) * std::exp(-d0 / 12.0);
    EXPECT_NEAR(cosine_mode(kGrid, h.values.back()), expected, 0.005 * expected);
    const double m0 = total_mass(kGrid, rho0);
    EXPECT_NEAR(total_mass(kGrid, h.values.back()), m0, 1e-10 * m0);
  }
}

TEST(Solvers, RejectBadInput) {
  const auto rho0 = SpatialProfile::cosine().cell_averages(kGrid);
  EXPECT_THROW(solve_subdiffusion(1.0, 1.0, rho0, kGrid, 1e-3, 1.0), ConfigurationError);
  EXPECT_THROW(solve_subdiffusion(0.5, 1.0, rho0, kGrid, 0.0, 1.0), ConfigurationError);
  EXPECT_THROW(solve_subdiffusion(0.5, 1.0, std::vector<double>(3, 1.0), kGrid, 1e-3, 1.0), ConfigurationError);
  EXPECT_THROW(solve_diffusion(0.0, 1.0, rho0, kGrid, 1e-3, 1.0), ConfigurationError);
}

TEST(ChainRule, WorkedValue) {
  const SmoothPath v{[](double t) { return t; }, [](double) { return 1.0; }};
  const auto r = chain_rule_residual(v, 0.5, 1.0);
  EXPECT_NEAR(r.lhs, 2.0, 1e-10);
  EXPECT_NEAR(r.rhs, 2.0, 1e-10);
}

TEST(ChainRule, ResidualBelowTolerance) {
  const SmoothPath lin{[](double t) { return t; }, [](double) { return 1.0; }};
  const SmoothPath sq{[](double t) { return t * t; }, [](double t) { return 2.0 * t; }};
  const SmoothPath osc{[](double t) { return std::sin(3.0 * t); }, [](double t) { return 3.0 * std::cos(3.0 * t); }};
  for (double alpha : {0.25, 0.5, 0.75})
    for (const auto& v : {lin, sq, osc})
      for (double t : {0.5, 1.0, 2.0}) EXPECT_LT(chain_rule_residual(v, alpha, t).residual, 1e-6);
  const SmoothPath shifted{[](double t) { return 1.0 + t; }, [](double) { return 1.0; }};
  EXPECT_THROW(chain_rule_residual(shifted, 0.5, 1.0), std::invalid_argument);
}

TEST(Energy, BalanceAndConvexity) {
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid);
  const auto sol = solve_subdiffusion(0.5, 1.0, rho0, kGrid, 1e-3, 1.0);
  const auto e = energy_balance(sol, sol.v.steps());
  EXPECT_NEAR(e.t, 1.0, 1e-12);
  EXPECT_LT(e.residual, 0.05);
  EXPECT_GT(e.term2, 0.0);
  EXPECT_GT(e.term3, 0.0);
  EXPECT_LE(convex_inequality_violation(sol), 1e-12);
}

TEST(Energy, RequiresIdentityMatrix) {
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5).cell_averages(kGrid);
  const auto sol = solve_subdiffusion(0.5, 0.5, rho0, kGrid, 1e-2, 0.1);
  EXPECT_THROW(energy_balance(sol, 1), UnsupportedConfiguration);
}
