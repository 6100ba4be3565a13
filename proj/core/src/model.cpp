#include "ccpt/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/units.hpp"

namespace ccpt {
namespace {

constexpr double kPhaseStep = 1e-2;
constexpr double kPoisoningLimit = 0.71;

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw InvalidArgument(std::string(name) + " must be finite");
  }
}

long double ground_energy_ld(long double ej, long double ec, long double n_g, long double phi,
                             int cutoff) {
  using Vector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int dim = 2 * cutoff + 1;
  Vector diag(dim);
  for (int i = 0; i < dim; ++i) {
    const long double q = 2.0L * static_cast<long double>(i - cutoff) - n_g;
    diag[i] = ec * q * q;
  }
  Vector sub = Vector::Constant(dim - 1, -ej * std::cos(phi / 2.0L));

  // The QL deflation test assumes entries of order one.
  const long double scale = std::max(diag.cwiseAbs().maxCoeff(), std::abs(ej));
  if (scale > 0.0L) {
    diag /= scale;
    sub /= scale;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("charge-basis diagonalization did not converge");
  }
  return solver.eigenvalues().minCoeff() * (scale > 0.0L ? scale : 1.0L);
}

}  // namespace

void DeviceParams::validate() const {
  require_finite(ej_hz, "E_J");
  require_finite(ec_hz, "E_C");
  require_finite(omega_bare, "omega_bare");
  require_finite(phi_zp, "phi_zp");
  require_finite(kappa_int, "kappa_int");
  require_finite(kappa_ext, "kappa_ext");
  if (ej_hz < 0.0) throw InvalidArgument("E_J must be >= 0");
  if (ec_hz <= 0.0) throw InvalidArgument("E_C must be > 0");
  if (omega_bare <= 0.0) throw InvalidArgument("omega_bare must be > 0");
  if (phi_zp <= 0.0) throw InvalidArgument("phi_zp must be > 0");
  if (charge_cutoff < 3) throw InvalidArgument("charge_cutoff must be >= 3");
  if (kappa_int < 0.0) throw InvalidArgument("kappa_int must be >= 0");
  if (kappa_ext <= 0.0) throw InvalidArgument("kappa_ext must be > 0");
}

DeviceParams DeviceParams::nominal() {
  DeviceParams p;
  p.ej_hz = 14.8e9;
  p.ec_hz = 54.1e9;
  p.omega_bare = hz_to_angular(5.7552e9);
  p.phi_zp = 0.17632671;
  p.charge_cutoff = 10;
  p.kappa_int = hz_to_angular(0.5e6);
  p.kappa_ext = hz_to_angular(1.0e6);
  return p;
}

void BiasPoint::validate() const {
  require_finite(n_g, "n_g");
  require_finite(phi_ext, "phi_ext");
  if (std::abs(n_g) > 1.0) throw InvalidArgument("|n_g| must be <= 1");
}

double BiasPoint::wrapped_flux() const {
  const double w = phi_ext - std::floor(phi_ext);
  return w >= 1.0 ? 0.0 : w;
}

bool BiasPoint::poisoning_risk() const { return std::abs(n_g) > kPoisoningLimit; }

void CavityConfig::validate() const {
  require_finite(omega0, "omega0");
  require_finite(kerr, "kerr");
  require_finite(kappa_int, "kappa_int");
  require_finite(kappa_ext, "kappa_ext");
  if (kappa_int < 0.0) throw InvalidArgument("kappa_int must be >= 0");
  if (kappa_ext <= 0.0) throw InvalidArgument("kappa_ext must be > 0");
}

void Drive::validate() const {
  require_finite(omega_d, "omega_d");
  require_finite(n_in, "n_in");
  if (n_in < 0.0) throw InvalidArgument("n_in must be >= 0");
}

Drive Drive::at_detuning(const CavityConfig& config, double detuning, double n_in) {
  return Drive{config.omega0 + detuning, n_in};
}

double cpt_ground_energy(double ej_hz, double ec_hz, double n_g, double phi, int charge_cutoff) {
  require_finite(ej_hz, "E_J");
  require_finite(ec_hz, "E_C");
  require_finite(n_g, "n_g");
  require_finite(phi, "phi");
  if (charge_cutoff < 3) throw InvalidArgument("charge_cutoff must be >= 3");
  return static_cast<double>(ground_energy_ld(ej_hz, ec_hz, n_g, phi, charge_cutoff));
}

PhaseDerivatives ground_energy_derivatives(const DeviceParams& device, const BiasPoint& bias) {
  device.validate();
  bias.validate();

  const long double phi0 = kTwoPi * bias.wrapped_flux();
  const long double h = kPhaseStep;
  const long double resolved_step = (phi0 + h) - phi0;
  if (resolved_step == 0.0L || std::abs(resolved_step - h) > 1e-9L * h) {
    std::ostringstream msg;
    msg << "finite-difference step " << kPhaseStep << " rad is not resolvable at phi = "
        << static_cast<double>(phi0);
    throw NumericalError(msg.str());
  }

  // f[k + 4] = E0(phi0 + k h), k = -4..4
  std::array<long double, 9> f{};
  for (int k = -4; k <= 4; ++k) {
    if (k == 3 || k == -3) continue;
    f[k + 4] = ground_energy_ld(device.ej_hz, device.ec_hz, bias.n_g, phi0 + k * h,
                                device.charge_cutoff);
  }
  const auto at = [&](int k) { return f[k + 4]; };

  const long double h2 = h * h;
  const long double h4 = h2 * h2;
  const long double d2 = (-at(2) + 16.0L * at(1) - 30.0L * at(0) + 16.0L * at(-1) - at(-2)) /
                         (12.0L * h2);
  const long double d4_h = (at(2) - 4.0L * at(1) + 6.0L * at(0) - 4.0L * at(-1) + at(-2)) / h4;
  const long double d4_2h =
      (at(4) - 4.0L * at(2) + 6.0L * at(0) - 4.0L * at(-2) + at(-4)) / (16.0L * h4);

  PhaseDerivatives out;
  out.second = static_cast<double>(d2);
  out.fourth = static_cast<double>((4.0L * d4_h - d4_2h) / 3.0L);
  out.fourth_step_error = static_cast<double>(std::abs(d4_h - d4_2h));

  const double tolerance = 1e-2 * std::abs(out.fourth) + 1e-3 * (device.ej_hz + device.ec_hz * 1e-6);
  if (!std::isfinite(out.fourth) || out.fourth_step_error > tolerance) {
    std::ostringstream msg;
    msg << "fourth phase derivative failed the step-halving check at n_g = " << bias.n_g
        << ", phi_ext = " << bias.phi_ext << " (discrepancy " << out.fourth_step_error << " Hz)";
    throw NumericalError(msg.str());
  }
  return out;
}

CavityConfig resolve_bias(const DeviceParams& device, const BiasPoint& bias,
                          const std::optional<DampingOverride>& damping) {
  const PhaseDerivatives d = ground_energy_derivatives(device, bias);
  const double zp2 = device.phi_zp * device.phi_zp;

  CavityConfig config;
  config.omega0 = device.omega_bare + zp2 * kTwoPi * d.second;
  config.kerr = 0.5 * zp2 * zp2 * kTwoPi * d.fourth;
  config.kappa_int = damping ? damping->kappa_int : device.kappa_int;
  config.kappa_ext = damping ? damping->kappa_ext : device.kappa_ext;
  config.validate();
  return config;
}

double calibrate_phi_zp(const DeviceParams& device, const BiasPoint& bias, double target_kerr) {
  require_finite(target_kerr, "target_kerr");
  DeviceParams unit = device;
  unit.phi_zp = 1.0;
  const double d4 = ground_energy_derivatives(unit, bias).fourth;
  const double kerr_unit = 0.5 * kTwoPi * d4;
  if (target_kerr == 0.0 || kerr_unit == 0.0 || (target_kerr > 0.0) != (kerr_unit > 0.0)) {
    throw InvalidArgument("target Kerr coefficient has the wrong sign or vanishes at this bias");
  }
  return std::pow(target_kerr / kerr_unit, 0.25);
}

double dbm_to_photon_flux(double power_dbm, double omega_d) {
  require_finite(power_dbm, "power");
  require_finite(omega_d, "omega_d");
  if (omega_d <= 0.0) throw InvalidArgument("omega_d must be > 0");
  return std::pow(10.0, (power_dbm - 30.0) / 10.0) / (kHbar * omega_d);
}

double photon_flux_to_dbm(double n_in, double omega_d) {
  require_finite(n_in, "n_in");
  require_finite(omega_d, "omega_d");
  if (omega_d <= 0.0) throw InvalidArgument("omega_d must be > 0");
  if (n_in <= 0.0) throw InvalidArgument("photon flux must be > 0 to express in dBm");
  return 10.0 * std::log10(n_in * kHbar * omega_d) + 30.0;
}

}  // namespace ccpt
