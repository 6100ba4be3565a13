#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccpt/errors.hpp"
#include "ccpt/steady_state.hpp"
#include "ccpt/units.hpp"
#include "oracles.hpp"

namespace ccpt {
namespace {

CavityConfig make_config(double kerr_hz, double kappa_int_hz = 0.5e6, double kappa_ext_hz = 1.0e6) {
  return CavityConfig{hz_to_angular(5.8e9), hz_to_angular(kerr_hz), hz_to_angular(kappa_int_hz),
                      hz_to_angular(kappa_ext_hz)};
}

/// Stability from a finite-difference Jacobian of the deterministic vector field.
bool jacobian_stable(const CavityConfig& c, const Drive& d, std::complex<double> alpha) {
  const double delta = d.detuning(c);
  const double drive = std::sqrt(c.kappa_ext * d.n_in);
  const auto field = [&](std::complex<double> a) {
    return std::complex<double>(-0.5 * c.kappa_tot(), delta - c.kerr * std::norm(a)) * a + drive;
  };
  const double h = 1e-6 * std::max(1.0, std::abs(alpha));
  const std::complex<double> dx = (field(alpha + h) - field(alpha - h)) / (2.0 * h);
  const std::complex<double> dy =
      (field(alpha + std::complex<double>(0, h)) - field(alpha - std::complex<double>(0, h))) / (2.0 * h);
  const double trace = dx.real() + dy.imag();
  const double det = dx.real() * dy.imag() - dy.real() * dx.imag();
  return trace < 0.0 && det > 0.0;
}

TEST(Roots, ZeroDriveGivesEmptyCavity) {
  const CavityConfig c = make_config(-470e3);
  const auto roots = photon_number_roots(c, Drive{c.omega0, 0.0});
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(roots[0].n, 0.0);
  EXPECT_TRUE(roots[0].stable);
}

TEST(Roots, LinearOscillatorIsLorentzian) {
  const CavityConfig c = make_config(0.0);
  for (const double det_hz : {-3e6, 0.0, 0.4e6, 2e6}) {
    const Drive d = Drive::at_detuning(c, hz_to_angular(det_hz), 1e8);
    const auto roots = photon_number_roots(c, d);
    ASSERT_EQ(roots.size(), 1u);
    const double delta = hz_to_angular(det_hz);
    const double k = c.kappa_tot();
    EXPECT_NEAR(roots[0].n, c.kappa_ext * d.n_in / (delta * delta + 0.25 * k * k), 1e-12 * roots[0].n);
  }
}

TEST(Roots, MatchScanOracleOnRandomDraws) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bistable = 0;
  for (int i = 0; i < 400; ++i) {
    const double kappa = hz_to_angular(0.2e6 + 3e6 * u(gen));
    const double ke = kappa * (0.05 + 0.95 * u(gen));
    const double kerr = (u(gen) < 0.5 ? -1.0 : 1.0) * kappa * std::pow(10.0, -3.0 + 2.5 * u(gen));
    const double delta = kappa * (-12.0 + 24.0 * u(gen));
    const double n_in_c = kappa * kappa * kappa / (3.0 * std::sqrt(3.0) * std::abs(kerr) * ke);
    const double n_in = n_in_c * std::pow(10.0, -1.0 + 2.5 * u(gen));
    const CavityConfig c{1e10, kerr, kappa - ke, ke};
    const Drive d = Drive::at_detuning(c, delta, n_in);
    const auto roots = photon_number_roots(c, d);
    const auto oracle = testing::scan_roots(kerr, delta, kappa, ke, n_in);
    ASSERT_EQ(roots.size(), oracle.size()) << "draw " << i;
    if (roots.size() == 3) ++bistable;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      EXPECT_NEAR(roots[k].n, oracle[k], 1e-7 * oracle[k]) << "draw " << i << " root " << k;
      EXPECT_LT(std::abs(testing::cubic_value(kerr, delta, kappa, ke, n_in, roots[k].n)),
                1e-9 * testing::cubic_scale(kerr, delta, kappa, ke, n_in, roots[k].n));
      EXPECT_NEAR(std::norm(roots[k].alpha), roots[k].n, 1e-12 * std::max(1.0, roots[k].n));
    }
  }
  EXPECT_GT(bistable, 25);
}

TEST(Roots, LabelsAndStabilityInBistableRegion) {
  const CavityConfig c = make_config(-470e3);
  const double n_in = 20.0 * critical_point(c).n_in_c;
  const BistableRegion region = bistable_region(c, n_in);
  ASSERT_TRUE(region.exists);
  const Drive d = Drive::at_detuning(c, 0.5 * (region.delta_lower + region.delta_upper), n_in);
  const auto roots = photon_number_roots(c, d);
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_EQ(roots[0].label, Branch::low);
  EXPECT_EQ(roots[1].label, Branch::unstable);
  EXPECT_EQ(roots[2].label, Branch::high);
  EXPECT_LT(roots[0].n, roots[1].n);
  EXPECT_LT(roots[1].n, roots[2].n);
  for (const auto& r : roots) {
    EXPECT_EQ(r.stable, jacobian_stable(c, d, r.alpha)) << to_string(r.label);
    EXPECT_EQ(r.stable, is_stable(r.n, c, d));
  }
  EXPECT_FALSE(roots[1].stable);
}

TEST(Roots, StabilityMatchesJacobianOnRandomDraws) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const CavityConfig c = make_config((u(gen) < 0.5 ? -1 : 1) * 1e6 * std::pow(10.0, -1 + u(gen)));
    const double n_in = critical_point(c).n_in_c * std::pow(10.0, 2.0 * u(gen));
    const Drive d = Drive::at_detuning(c, c.kappa_tot() * (-10.0 + 20.0 * u(gen)), n_in);
    for (const auto& r : photon_number_roots(c, d)) {
      EXPECT_EQ(r.stable, jacobian_stable(c, d, r.alpha)) << "draw " << i << " n=" << r.n;
    }
  }
}

TEST(Roots, SingleRootLabelFollowsBranchItContinues) {
  const CavityConfig c = make_config(-470e3);
  const double n_in = 20.0 * critical_point(c).n_in_c;
  const BistableRegion region = bistable_region(c, n_in);
  // Red of the window only the high branch survives for K < 0; blue of it only the low one.
  const auto red = photon_number_roots(c, Drive::at_detuning(c, region.delta_lower - 0.2 * c.kappa_tot(), n_in));
  const auto blue = photon_number_roots(c, Drive::at_detuning(c, region.delta_upper + 0.2 * c.kappa_tot(), n_in));
  ASSERT_EQ(red.size(), 1u);
  ASSERT_EQ(blue.size(), 1u);
  EXPECT_EQ(red[0].label, Branch::low);
  EXPECT_EQ(blue[0].label, Branch::high);
}

TEST(Reflection, LosslessCavityHasUnitMagnitude) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const CavityConfig c = make_config(-470e3, 0.0, 1.5e6);
  for (int i = 0; i < 1000; ++i) {
    const Drive d = Drive::at_detuning(c, 2e8 * u(gen), 1e8 * (1.0 + u(gen)));
    const double n = 50.0 * (1.0 + u(gen));
    EXPECT_NEAR(std::abs(reflection_coefficient(c, d, n)), 1.0, 1e-12);
  }
}

TEST(Reflection, CriticalCouplingOnEffectiveResonanceIsZero) {
  const CavityConfig c = make_config(-470e3, 0.75e6, 0.75e6);
  const double n = 12.0;
  const Drive d = Drive::at_detuning(c, c.kerr * n, 1e7);
  EXPECT_LT(std::abs(reflection_coefficient(c, d, n)), 1e-12);
}

TEST(Reflection, LossyCavityIsPassive) {
  const CavityConfig c = make_config(-470e3, 0.3e6, 1.2e6);
  for (double det = -5e7; det <= 5e7; det += 1e6) {
    EXPECT_LT(std::abs(reflection_coefficient(c, Drive::at_detuning(c, det, 1e7), 3.0)), 1.0);
  }
}

TEST(Phase, WrapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_deg(180.0), 180.0);
  EXPECT_DOUBLE_EQ(wrap_deg(-180.0), 180.0);
  EXPECT_DOUBLE_EQ(wrap_deg(190.0), -170.0);
  EXPECT_DOUBLE_EQ(wrap_deg(-540.0), 180.0);
  EXPECT_NEAR(phase_deg({0.0, 1.0}), 90.0, 1e-12);
  EXPECT_THROW(phase_deg({0.0, 0.0}), UndefinedPhase);
}

TEST(CriticalPoint, MatchesClosedForm) {
  for (const double k_hz : {-470e3, -786e3, 501e3}) {
    const CavityConfig c = make_config(k_hz);
    const CriticalPoint cp = critical_point(c);
    const double kappa = c.kappa_tot();
    EXPECT_NEAR(cp.delta_c, std::copysign(std::sqrt(3.0) / 2.0 * kappa, c.kerr), 1e-9 * kappa);
    EXPECT_NEAR(cp.n_in_c, kappa * kappa * kappa / (3.0 * std::sqrt(3.0) * std::abs(c.kerr) * c.kappa_ext),
                1e-9 * cp.n_in_c);
    EXPECT_NEAR(cp.p_c, cp.n_in_c * kHbar * (c.omega0 + cp.delta_c), 1e-9 * cp.p_c);
  }
}

TEST(CriticalPoint, ZeroKerrHasNone) { EXPECT_THROW(critical_point(make_config(0.0)), NoCriticalPoint); }

TEST(BistableRegion, OpensAboveCriticalPower) {
  const CavityConfig c = make_config(-690e3);
  const CriticalPoint cp = critical_point(c);
  EXPECT_FALSE(bistable_region(c, 0.99 * cp.n_in_c).exists);
  const BistableRegion r = bistable_region(c, 1.01 * cp.n_in_c);
  ASSERT_TRUE(r.exists);
  EXPECT_NEAR(0.5 * (r.delta_lower + r.delta_upper), cp.delta_c, 0.02 * std::abs(cp.delta_c));
  EXPECT_TRUE(r.contains(0.5 * (r.delta_lower + r.delta_upper)));
  EXPECT_FALSE(r.contains(r.delta_upper + 1.0));
}

TEST(BistableRegion, EdgesMatchRootCountChangesOnFineGrid) {
  for (const double k_hz : {-470e3, 501e3}) {
    const CavityConfig c = make_config(k_hz);
    const double n_in = 30.0 * critical_point(c).n_in_c;
    const BistableRegion r = bistable_region(c, n_in);
    ASSERT_TRUE(r.exists);
    const double kappa = c.kappa_tot();
    const double lo = std::min(r.delta_lower, r.delta_upper) - 2.0 * kappa;
    const double hi = std::max(r.delta_lower, r.delta_upper) + 2.0 * kappa;
    const int samples = 2000;
    const double step = (hi - lo) / samples;
    const auto [first, last] = testing::scan_bistable_window(c.kerr, kappa, c.kappa_ext, n_in, lo, hi, samples);
    EXPECT_NEAR(first, r.delta_lower, step);
    EXPECT_NEAR(last, r.delta_upper, step);
  }
}

TEST(ResponseCurve, ReportsAllBranchesPerDetuning) {
  const CavityConfig c = make_config(-470e3);
  const double n_in = 20.0 * critical_point(c).n_in_c;
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(hz_to_angular(-15e6 + 0.1e6 * i));
  const auto curve = response_curve(c, n_in, grid);
  ASSERT_EQ(curve.size(), grid.size());
  const BistableRegion r = bistable_region(c, n_in);
  for (const auto& p : curve) {
    EXPECT_EQ(p.branches.size() == 3, r.contains(p.delta)) << p.delta;
  }
  std::vector<double> unsorted{1.0, 0.0};
  EXPECT_THROW(response_curve(c, n_in, unsorted), InvalidArgument);
  EXPECT_THROW(response_curve(c, n_in, std::vector<double>{}), InvalidArgument);
}

}  // namespace
}  // namespace ccpt
