#pragma once

#include <optional>

namespace ccpt {

/// Physical constants of a cavity-embedded Cooper pair transistor.
///
/// Energies are in units of h*Hz (i.e. plain frequencies), rates and the bare
/// cavity frequency in rad/s.
struct DeviceParams {
  double ej_hz = 14.8e9;
  double ec_hz = 54.1e9;
  double omega_bare = 0.0;
  double phi_zp = 0.0;
  int charge_cutoff = 10;
  double kappa_int = 0.0;
  double kappa_ext = 0.0;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;

  /// Nominal device: E_J = 14.8 GHz, E_C = 54.1 GHz, omega_bare/2pi = 5.7552 GHz,
  /// phi_zp calibrated to K(0,0)/2pi = -470 kHz, kappa_ext/2pi = 1.0 MHz,
  /// kappa_int/2pi = 0.5 MHz.
  static DeviceParams nominal();
};

/// DC operating point: gate charge (units of e) and external flux (units of the flux quantum).
struct BiasPoint {
  double n_g = 0.0;
  double phi_ext = 0.0;

  void validate() const;
  /// Flux reduced to [0, 1).
  double wrapped_flux() const;
  /// True when |n_g| exceeds the range where quasiparticle poisoning is negligible.
  bool poisoning_risk() const;
};

/// Optional per-bias replacement of the device damping rates (rad/s).
struct DampingOverride {
  double kappa_int = 0.0;
  double kappa_ext = 0.0;
};

/// Effective Kerr oscillator at one bias point. All quantities in rad/s.
struct CavityConfig {
  double omega0 = 0.0;
  double kerr = 0.0;
  double kappa_int = 0.0;
  double kappa_ext = 0.0;

  double kappa_tot() const { return kappa_int + kappa_ext; }
  void validate() const;
};

/// Coherent drive tone: angular frequency (rad/s) and input photon flux (photons/s).
struct Drive {
  double omega_d = 0.0;
  double n_in = 0.0;

  double detuning(const CavityConfig& config) const { return omega_d - config.omega0; }
  void validate() const;

  static Drive at_detuning(const CavityConfig& config, double detuning, double n_in);
};

/// Lowest eigenvalue (h*Hz) of the charge-basis CPT Hamiltonian with diagonal
/// E_C (2n - n_g)^2 and nearest-neighbour coupling -E_J cos(phi/2),
/// n in [-charge_cutoff, charge_cutoff].
double cpt_ground_energy(double ej_hz, double ec_hz, double n_g, double phi, int charge_cutoff);

/// Phase derivatives of the ground energy (h*Hz per rad^k) at one bias point.
struct PhaseDerivatives {
  double second = 0.0;
  double fourth = 0.0;
  /// |d4(h) - d4(2h)|, the step-halving discrepancy of the fourth derivative.
  double fourth_step_error = 0.0;
};

/// Finite-difference phase derivatives of the ground energy at phi = 2 pi phi_ext.
/// Step 1e-2 rad, five-point stencils, Richardson-extrapolated fourth derivative.
PhaseDerivatives ground_energy_derivatives(const DeviceParams& device, const BiasPoint& bias);

/// Maps a bias point to the effective oscillator:
/// omega0 = omega_bare + phi_zp^2 d2E0/dphi2, K = (phi_zp^4 / 2) d4E0/dphi4 (both in rad/s).
CavityConfig resolve_bias(const DeviceParams& device, const BiasPoint& bias,
                          const std::optional<DampingOverride>& damping = std::nullopt);

/// phi_zp for which resolve_bias yields kerr == target_kerr (rad/s) at the given bias.
double calibrate_phi_zp(const DeviceParams& device, const BiasPoint& bias, double target_kerr);

/// Photon flux (photons/s) of a tone with the given power (dBm) and angular frequency.
double dbm_to_photon_flux(double power_dbm, double omega_d);

/// Inverse of dbm_to_photon_flux.
double photon_flux_to_dbm(double n_in, double omega_d);

}  // namespace ccpt
