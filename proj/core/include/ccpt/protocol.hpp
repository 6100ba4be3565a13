#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccpt/dynamics.hpp"
#include "ccpt/measurement.hpp"
#include "ccpt/model.hpp"
#include "ccpt/units.hpp"

namespace ccpt {

/// Timing and detuning schedule of one charge-sensing shot.
///
/// The drive starts at final_detuning - f_ramp (monostable, blue side for f_ramp < 0), is
/// ramped to the final detuning over t_r, held for t_stab, then held at
/// final_detuning + f_latch while the phase is acquired for t_acq.
struct SenseProtocol {
  double f_ramp = hz_to_angular(-41e6);  ///< rad/s
  double t_r = 530e-9;
  double t_stab = 4.9e-6;
  double f_latch = 0.0;                  ///< rad/s
  double t_acq = 3e-6;
  double t_down = 5e-6;
  int n_tot = 20000;

  void validate() const;
  double delta_start(double final_detuning) const { return final_detuning - f_ramp; }
  double pulse_duration() const { return t_r + t_stab + t_acq; }
  TimeWindow acquisition_window() const { return {t_r + t_stab, t_r + t_stab + t_acq}; }
  /// Envelope of one shot at the given input amplitude (sqrt(photons/s)).
  DriveEnvelope envelope(double final_detuning, double amplitude) const;
};

struct SenseOptions {
  double dt = 0.0;       ///< 0 selects default_dt
  unsigned threads = 1;  ///< 0 uses all hardware threads
};

/// One shot: integrate from an empty cavity and return the circular-mean phase (degrees)
/// over the acquisition window.
double sense_once(const CavityConfig& config, double power_dbm, double final_detuning,
                  const SenseProtocol& proto, const NoiseModel& noise, const AmplifierChain& chain,
                  std::uint64_t seed, double dt = 0.0);

/// One shot acquired for max(t_acq_list); returns the averaged phase over each prefix
/// t_acq in t_acq_list. Equivalent to separate shots with those acquisition times because the
/// acquisition drive is constant.
std::vector<double> sense_once_multi(const CavityConfig& config, double power_dbm,
                                     double final_detuning, const SenseProtocol& proto,
                                     const NoiseModel& noise, const AmplifierChain& chain,
                                     std::uint64_t seed, std::span<const double> t_acq_list,
                                     double dt = 0.0);

/// Steady-state phases of the high and low states at a drive, used to label histogram peaks.
/// With a single steady state the missing branch is placed opposite (180 degrees) to it, so
/// every peak near the unique state is attributed to that state's label.
BranchPhases branch_priors(const CavityConfig& config, const Drive& drive);

struct SCurveResult {
  SCurve curve;
  std::vector<PhaseHistogram> histograms;
  std::vector<DoubleGaussFit> fits;
  std::vector<BranchPhases> priors;
  std::string fit_error;        ///< non-empty when the sigmoid fit failed
  bool below_critical = false;  ///< drive power below the bistability threshold
};

/// Monte Carlo S-curve: n_tot shots per detuning with seeds derived from
/// (master_seed, detuning index, repetition index), p_high from double-Gaussian weights,
/// followed by a sigmoid fit. Fit failures are reported in fit_error with the raw points kept.
SCurveResult s_curve(const CavityConfig& config, double power_dbm, std::span<const double> detuning_grid,
                     const SenseProtocol& proto, const NoiseModel& noise, const AmplifierChain& chain,
                     std::uint64_t master_seed, const SenseOptions& options = {});

struct FidelityPoint {
  double t_acq = 0.0;
  FidelityReport report;
};

struct CompareResult {
  std::vector<double> frequencies;  ///< absolute drive frequencies, rad/s
  SCurveResult a;
  SCurveResult b;
  ContrastResult contrast;          ///< x_opt is an absolute frequency, rad/s
  PhaseHistogram hist_a;
  PhaseHistogram hist_b;
  FidelityReport fidelity;
  bool low_distinguishability = false;
  double occupancy_a = 0.0;         ///< highest stable photon number at the optimum
  double occupancy_b = 0.0;
  std::vector<FidelityPoint> fidelity_vs_t_acq;
};

/// Compares two bias points on a common absolute frequency grid: both S-curves, the
/// maximal-contrast frequency, n_tot fresh shots per bias there, and their fidelity. Extra
/// acquisition times in t_acq_sweep reuse the same shots (prefix averaging).
CompareResult compare_bias(const CavityConfig& config_a, const CavityConfig& config_b, double power_dbm,
                           std::span<const double> frequency_grid, const SenseProtocol& proto,
                           const NoiseModel& noise, const AmplifierChain& chain, std::uint64_t seed,
                           const SenseOptions& options = {}, std::span<const double> t_acq_sweep = {});

/// Highest stable steady-state photon number at the given drive.
double high_branch_occupancy(const CavityConfig& config, double power_dbm, double detuning);
/// Lowest stable steady-state photon number at the given drive.
double low_branch_occupancy(const CavityConfig& config, double power_dbm, double detuning);

}  // namespace ccpt
