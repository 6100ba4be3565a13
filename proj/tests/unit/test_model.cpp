#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ccpt/errors.hpp"
#include "ccpt/model.hpp"
#include "ccpt/units.hpp"
#include "oracles.hpp"

namespace ccpt {
namespace {

constexpr double kEj = 14.8e9;
constexpr double kEc = 54.1e9;

TEST(GroundEnergy, ZeroCouplingAtZeroGateIsZero) {
  EXPECT_DOUBLE_EQ(cpt_ground_energy(0.0, kEc, 0.0, 1.234, 10), 0.0);
}

TEST(GroundEnergy, ZeroCouplingAtDegeneracyIsChargingEnergy) {
  EXPECT_NEAR(cpt_ground_energy(0.0, kEc, 1.0, 0.0, 10), kEc, 1e-6 * kEc);
}

TEST(GroundEnergy, DegeneracyPointFollowsTwoLevelAvoidedCrossing) {
  const double e0 = cpt_ground_energy(kEj, kEc, 1.0, 0.0, 10);
  const double two_level = testing::two_level_ground_energy(kEj, kEc, 1.0, 0.0);
  EXPECT_NEAR(two_level, kEc - kEj, 1.0);
  // Higher charge states push the full result slightly below the two-level value.
  EXPECT_LT(e0, two_level);
  EXPECT_NEAR(e0, two_level, 0.02 * two_level);
}

TEST(GroundEnergy, MatchesSturmBisectionOracle) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ng(-1.0, 1.0);
  std::uniform_real_distribution<double> phi(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> ratio(0.01, 3.0);
  for (int i = 0; i < 300; ++i) {
    const double ej = ratio(gen) * kEc;
    const double g = ng(gen);
    const double p = phi(gen);
    const double expected = testing::sturm_ground_energy(ej, kEc, g, p, 10);
    EXPECT_NEAR(cpt_ground_energy(ej, kEc, g, p, 10), expected, 1e-9 * (kEc + ej))
        << "ej=" << ej << " n_g=" << g << " phi=" << p;
  }
}

TEST(GroundEnergy, SymmetricInPhaseAndGate) {
  for (const double g : {0.0, 0.3, 0.62, 0.9}) {
    for (const double p : {0.1, 1.0, 2.5}) {
      const double e = cpt_ground_energy(kEj, kEc, g, p, 10);
      EXPECT_NEAR(cpt_ground_energy(kEj, kEc, g, -p, 10), e, 1e-6);
      EXPECT_NEAR(cpt_ground_energy(kEj, kEc, -g, p, 10), e, 1e-6);
    }
  }
}

TEST(GroundEnergy, RejectsBadInputs) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cpt_ground_energy(nan, kEc, 0.0, 0.0, 10), InvalidArgument);
  EXPECT_THROW(cpt_ground_energy(kEj, kEc, nan, 0.0, 10), InvalidArgument);
  EXPECT_THROW(cpt_ground_energy(kEj, kEc, 0.0, INFINITY, 10), InvalidArgument);
  EXPECT_THROW(cpt_ground_energy(kEj, kEc, 0.0, 0.0, 2), InvalidArgument);
}

/// Seven-point central stencils on the Sturm oracle, step 5e-3 rad.
std::pair<double, double> oracle_derivatives(double ng, double phi_ext) {
  const double h = 5e-3;
  const double phi0 = 2.0 * std::numbers::pi * phi_ext;
  const auto e = [&](int k) { return testing::sturm_ground_energy(kEj, kEc, ng, phi0 + k * h, 10); };
  const double d2 = (2 * e(-3) - 27 * e(-2) + 270 * e(-1) - 490 * e(0) + 270 * e(1) - 27 * e(2) + 2 * e(3)) /
                    (180 * h * h);
  const double d4 =
      (-e(-3) + 12 * e(-2) - 39 * e(-1) + 56 * e(0) - 39 * e(1) + 12 * e(2) - e(3)) / (6 * h * h * h * h);
  return {d2, d4};
}

TEST(ResolveBias, DerivativesAgreeWithIndependentStencils) {
  const DeviceParams dev = DeviceParams::nominal();
  for (const auto& [ng, flux] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.62, 0.0}, {0.71, 0.0},
                                                                       {0.3, 0.2}, {0.0, 0.5}}) {
    const PhaseDerivatives d = ground_energy_derivatives(dev, BiasPoint{ng, flux});
    const auto [d2, d4] = oracle_derivatives(ng, flux);
    EXPECT_NEAR(d.second, d2, 1e-6 * std::abs(d2)) << ng << " " << flux;
    EXPECT_NEAR(d.fourth, d4, 2e-3 * std::abs(d4)) << ng << " " << flux;
  }
}

TEST(ResolveBias, CalibratedKerrAtZeroBias) {
  const CavityConfig c = resolve_bias(DeviceParams::nominal(), BiasPoint{0.0, 0.0});
  EXPECT_NEAR(angular_to_hz(c.kerr), -470e3, 0.5e3);
}

TEST(ResolveBias, MapsDerivativesToFrequencyAndKerr) {
  const DeviceParams dev = DeviceParams::nominal();
  const BiasPoint bias{0.62, 0.0};
  const PhaseDerivatives d = ground_energy_derivatives(dev, bias);
  const CavityConfig c = resolve_bias(dev, bias);
  const double zp2 = dev.phi_zp * dev.phi_zp;
  EXPECT_NEAR(c.omega0, dev.omega_bare + zp2 * kTwoPi * d.second, 1e-6 * c.omega0);
  EXPECT_NEAR(c.kerr, 0.5 * zp2 * zp2 * kTwoPi * d.fourth, 1e-9 * std::abs(c.kerr));
  EXPECT_DOUBLE_EQ(c.kappa_int, dev.kappa_int);
  EXPECT_DOUBLE_EQ(c.kappa_ext, dev.kappa_ext);
}

TEST(ResolveBias, ResonanceRisesTowardChargeDegeneracy) {
  const DeviceParams dev = DeviceParams::nominal();
  const CavityConfig a = resolve_bias(dev, BiasPoint{0.62, 0.0});
  const CavityConfig b = resolve_bias(dev, BiasPoint{0.71, 0.0});
  EXPECT_GT(b.omega0, a.omega0);
  EXPECT_LT(b.kerr, a.kerr);
  EXPECT_LT(a.kerr, 0.0);
}

TEST(ResolveBias, DampingOverrideReplacesRates) {
  const CavityConfig c = resolve_bias(DeviceParams::nominal(), BiasPoint{}, DampingOverride{1.0, 2.0});
  EXPECT_DOUBLE_EQ(c.kappa_int, 1.0);
  EXPECT_DOUBLE_EQ(c.kappa_ext, 2.0);
}

TEST(ResolveBias, KinkAtZeroCouplingDegeneracyIsANumericalError) {
  EXPECT_THROW(resolve_bias(DeviceParams::nominal(), BiasPoint{1.0, 0.5}), NumericalError);
}

TEST(ResolveBias, FluxIsPeriodic) {
  const DeviceParams dev = DeviceParams::nominal();
  const CavityConfig a = resolve_bias(dev, BiasPoint{0.2, 0.1});
  const CavityConfig b = resolve_bias(dev, BiasPoint{0.2, 1.1});
  EXPECT_NEAR(a.kerr, b.kerr, 1e-6 * std::abs(a.kerr));
  EXPECT_NEAR(a.omega0, b.omega0, 1e-9 * a.omega0);
}

TEST(CalibratePhiZp, ReproducesTargetKerr) {
  DeviceParams dev = DeviceParams::nominal();
  const double target = hz_to_angular(-600e3);
  dev.phi_zp = calibrate_phi_zp(dev, BiasPoint{}, target);
  EXPECT_NEAR(resolve_bias(dev, BiasPoint{}).kerr, target, 1e-6 * std::abs(target));
}

TEST(Validation, DeviceAndBias) {
  DeviceParams dev = DeviceParams::nominal();
  EXPECT_NO_THROW(dev.validate());
  dev.charge_cutoff = 2;
  EXPECT_THROW(dev.validate(), InvalidArgument);
  dev = DeviceParams::nominal();
  dev.kappa_int = -1.0;
  EXPECT_THROW(dev.validate(), InvalidArgument);
  EXPECT_THROW(BiasPoint({1.2, 0.0}).validate(), InvalidArgument);
  EXPECT_THROW(BiasPoint({0.0, NAN}).validate(), InvalidArgument);
  EXPECT_NO_THROW(BiasPoint({-1.0, 3.7}).validate());
  EXPECT_DOUBLE_EQ(BiasPoint({0.0, 3.75}).wrapped_flux(), 0.75);
  EXPECT_DOUBLE_EQ(BiasPoint({0.0, -0.25}).wrapped_flux(), 0.75);
}

TEST(Validation, PoisoningRiskAboveThreshold) {
  EXPECT_FALSE(BiasPoint({0.71, 0.0}).poisoning_risk());
  EXPECT_TRUE(BiasPoint({0.72, 0.0}).poisoning_risk());
  EXPECT_TRUE(BiasPoint({-0.9, 0.0}).poisoning_risk());
}

TEST(PowerConversion, PhotonFluxAtReadoutPower) {
  const double omega = hz_to_angular(5.8013e9);
  const double flux = dbm_to_photon_flux(-128.0, omega);
  EXPECT_NEAR(flux, 1e-3 * std::pow(10.0, -12.8) / (kHbar * omega), 1e-9 * flux);
  EXPECT_NEAR(flux, 4.12305e7, 1e2);
  EXPECT_NEAR(photon_flux_to_dbm(flux, omega), -128.0, 1e-12);
}

}  // namespace
}  // namespace ccpt
