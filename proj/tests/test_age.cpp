#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "subdiff/age/checks.hpp"
#include "subdiff/age/homogeneous.hpp"
#include "subdiff/age/space.hpp"
#include "subdiff/frac/solvers.hpp"

using namespace subdiff;

namespace {

const PeriodicGrid kGrid{0.0, 2.0 * std::numbers::pi, 128};

RenewalTrace spatial_run(const HazardModel& m, const SpatialProfile& rho0, SpaceMethod method, double eps = 0.2,
                         double beta = 4.0, JumpKernel kernel = JumpKernel(Triangular{}, 1.0)) {
  SpaceOptions opt;
  opt.method = method;
  opt.snapshot_times = {0.5, 1.0};
  return solve_age_space(m, {rho0, AgeProfile::exponential()}, kernel, eps, beta, 1.0, 1.0, kGrid, opt);
}

}  // namespace

TEST(Homogeneous, ConservesMassAndRespectsComparison) {
  for (const auto& m : {HazardModel::power_law(0.25), HazardModel::power_law(0.75), HazardModel::constant(1.5)}) {
    const auto tr = solve_age_homogeneous(m, AgeProfile::exponential(), 200.0, 0.05);
    EXPECT_LT(tr.max_mass_drift, 1e-8);
    EXPECT_NEAR(tr.initial_mass, 1.0, 1e-12);
    ASSERT_TRUE(tr.comparison_checked);
    EXPECT_LE(tr.comparison_max, tr.comparison_initial + 1e-12);
  }
}

TEST(Homogeneous, ConstantRateGivesConstantRenewal) {
  for (double d0 : {0.5, 1.0, 3.0}) {
    const auto tr = solve_age_homogeneous(HazardModel::constant(d0), AgeProfile::exponential(d0), 20.0, 0.01);
    for (std::size_t i = 0; i < tr.t.size(); ++i) ASSERT_NEAR(tr.renewal[i], d0, 1e-10) << "step " << i;
  }
  // away from equilibrium the renewal still equals d0 times the mass
  const auto tr = solve_age_homogeneous(HazardModel::constant(2.0), AgeProfile::exponential(0.5), 5.0, 0.01);
  for (std::size_t i = 0; i < tr.t.size(); ++i) ASSERT_NEAR(tr.renewal[i], 2.0 * tr.mass[i], 1e-10);
}

TEST(Homogeneous, RenewalIdentityWithinTwoPercent) {
  const auto g = AgeProfile::exponential();
  const auto tr = solve_age_homogeneous(HazardModel::power_law(0.5), g, 100.0, 0.01);
  for (double t : {10.0, 100.0}) EXPECT_LT(renewal_integral_check(tr, g, 0.5, t).relative_gap(), 0.02);
}

TEST(Homogeneous, RenewalResidualIsFirstOrderInAgeStep) {
  const auto g = AgeProfile::exponential();
  const auto m = HazardModel::power_law(0.5);
  const auto coarse = solve_age_homogeneous(m, g, 100.0, 0.02);
  const auto fine = solve_age_homogeneous(m, g, 100.0, 0.01);
  for (double t : {10.0, 100.0}) {
    const double rc = renewal_integral_check(coarse, g, 0.5, t).relative_gap();
    const double rf = renewal_integral_check(fine, g, 0.5, t).relative_gap();
    EXPECT_GE(rc / rf, 1.8) << "t " << t;
  }
}

TEST(Homogeneous, IdentityRightSideIncreasesToOne) {
  const auto g = AgeProfile::exponential();
  double prev = 0.0;
  for (double t : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double r = renewal_identity_rhs(g, 0.5, t);
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 1.0);
    prev = r;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(Homogeneous, DecayBoundsHold) {
  const auto g = AgeProfile::exponential();
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto tr = solve_age_homogeneous(HazardModel::power_law(alpha), g, 1000.0, 0.1);
    for (double delta : {0.5, 0.9}) {
      const auto d = decay_weighted_integrals(tr, g, alpha, delta);
      EXPECT_TRUE(d.upper_holds) << alpha << " " << delta;
      EXPECT_TRUE(d.lower_holds) << alpha << " " << delta;
      EXPECT_GT(d.upper_bound, 0.0);
      EXPECT_GT(d.lower_bound, 0.0);
    }
  }
}

TEST(Homogeneous, DecayKernelLimit) {
  // tau^(alpha+delta) k(tau) tends to B(1 - alpha, alpha + delta)
  const double alpha = 0.5, delta = 0.5, tau = 1e7;
  EXPECT_NEAR(std::pow(tau, alpha + delta) * decay_kernel(alpha, delta, tau), std::beta(1.0 - alpha, alpha + delta),
              1e-3);
}

TEST(Homogeneous, RejectsBadArguments) {
  EXPECT_THROW(solve_age_homogeneous(HazardModel::power_law(0.5), AgeProfile::exponential(), 10.0, 0.0),
               ConfigurationError);
  EXPECT_THROW(solve_age_homogeneous(HazardModel::power_law(0.5), AgeProfile::exponential(), -1.0, 0.1),
               ConfigurationError);
}

TEST(Space, AllMethodsConserveMass) {
  const auto m = HazardModel::power_law(0.5);
  for (auto method : {SpaceMethod::Direct, SpaceMethod::ModalDiscrete, SpaceMethod::ModalContinuum}) {
    const auto tr = spatial_run(m, SpatialProfile::cosine(1.0, 0.5), method);
    EXPECT_LT(tr.max_mass_drift, 1e-8);
    for (const auto& s : tr.snapshots)
      EXPECT_NEAR(total_mass(kGrid, s.rho), 2.0 * std::numbers::pi, 1e-8 * 2.0 * std::numbers::pi);
  }
}

TEST(Space, DirectAndModalDiscreteAgree) {
  const auto m = HazardModel::power_law(0.5);
  const auto a = spatial_run(m, SpatialProfile::cosine(1.0, 0.5), SpaceMethod::Direct);
  const auto b = spatial_run(m, SpatialProfile::cosine(1.0, 0.5), SpaceMethod::ModalDiscrete);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k)
    EXPECT_LT(l1_distance(kGrid, a.snapshots[k].rho, b.snapshots[k].rho), 1e-10);
}

TEST(Space, SymmetricDataStaysSymmetricAndPositive) {
  const auto m = HazardModel::power_law(0.5);
  const auto tr = spatial_run(m, SpatialProfile::gaussian(std::numbers::pi, 0.3), SpaceMethod::Direct);
  for (const auto& s : tr.snapshots) {
    const double peak = *std::max_element(s.rho.begin(), s.rho.end());
    for (std::size_t j = 0; j < kGrid.cells; ++j) {
      ASSERT_NEAR(s.rho[j], s.rho[kGrid.cells - 1 - j], 1e-12 * peak);
      ASSERT_GE(s.rho[j], 0.0);
    }
  }
  EXPECT_LE(tr.comparison_max, tr.comparison_initial + 1e-12);
}

TEST(Space, ZeroJumpKernelLeavesDensityUnchanged) {
  const auto m = HazardModel::power_law(0.5);
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5);
  const auto tr = spatial_run(m, rho0, SpaceMethod::Direct, 0.2, 4.0, JumpKernel(Dirac{}, 1.0));
  const auto avg = rho0.cell_averages(kGrid);
  for (const auto& s : tr.snapshots) EXPECT_LT(l1_distance(kGrid, s.rho, avg), 1e-10);
}

TEST(Space, UniformDataStaysUniform) {
  const auto tr = spatial_run(HazardModel::constant(1.0), SpatialProfile::uniform(2.0), SpaceMethod::ModalContinuum,
                              0.2, 2.0);
  for (const auto& s : tr.snapshots)
    for (double v : s.rho) ASSERT_NEAR(v, 2.0, 1e-10);
}

TEST(Space, SmallerEpsilonApproachesDiffusionDecay) {
  // cosine amplitude under the constant-rate model decays like exp(-m2/2 t) as eps -> 0
  const auto m = HazardModel::constant(1.0);
  const auto rho0 = SpatialProfile::cosine(1.0, 0.5);
  const double exact = cosine_mode(kGrid, rho0.cell_averages(kGrid)) * std::exp(-1.0 / 12.0);
  double prev = INFINITY;
  for (double eps : {0.4, 0.2, 0.1}) {
    const auto tr = spatial_run(m, rho0, SpaceMethod::ModalContinuum, eps, 2.0);
    const double err = std::abs(cosine_mode(kGrid, tr.snapshots.back().rho) - exact);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Space, RejectsBadScaling) {
  const auto m = HazardModel::power_law(0.5);
  EXPECT_THROW(spatial_run(m, SpatialProfile::cosine(), SpaceMethod::Direct, 0.0), ConfigurationError);
  EXPECT_THROW(spatial_run(m, SpatialProfile::cosine(), SpaceMethod::Direct, 0.2, -1.0), ConfigurationError);
}
