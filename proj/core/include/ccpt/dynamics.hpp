#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ccpt/model.hpp"
#include "ccpt/rng.hpp"

namespace ccpt {

enum class SegmentKind { hold, ramp };

/// One piece of a drive envelope. Detunings in rad/s, amplitudes in sqrt(photons/s).
struct EnvelopeSegment {
  SegmentKind kind = SegmentKind::hold;
  double duration = 0.0;
  double detuning_start = 0.0;
  double detuning_end = 0.0;
  double amp_start = 0.0;
  double amp_end = 0.0;
  /// Permits a discontinuity from the previous segment (an instantaneous frequency step).
  bool step_start = false;
};

/// Piecewise-linear drive in the frame rotating at the instantaneous drive frequency.
///
/// A frequency chirp only enters the equation of motion through the detuning, so an envelope
/// is fully described by detuning(t) and the real input amplitude alpha_in(t).
class DriveEnvelope {
 public:
  struct Sample {
    double detuning = 0.0;
    double amplitude = 0.0;
  };

  DriveEnvelope& hold(double duration, double detuning, double amplitude);
  DriveEnvelope& ramp(double duration, double detuning_start, double detuning_end,
                      double amp_start, double amp_end);
  /// Hold that starts with an instantaneous jump to the new values.
  DriveEnvelope& step_hold(double duration, double detuning, double amplitude);
  DriveEnvelope& append(const EnvelopeSegment& segment);

  /// Throws InvalidArgument unless non-empty. Segment durations and continuity (except at
  /// explicit steps) are checked when appending.
  void validate() const;

  double duration() const { return starts_.empty() ? 0.0 : starts_.back() + segments_.back().duration; }
  std::span<const EnvelopeSegment> segments() const { return segments_; }
  /// Start time of each segment.
  std::span<const double> starts() const { return starts_; }

  /// Drive at time t (clamped to [0, duration]).
  Sample at(double t) const;
  /// Same as at(), starting the segment search from *cursor and updating it; O(1) for
  /// monotone time sequences.
  Sample at(double t, std::size_t* cursor) const;

 private:
  std::vector<EnvelopeSegment> segments_;
  std::vector<double> starts_;
};

/// Additive complex white noise of intensity kappa_tot * n_eff.
struct NoiseModel {
  double n_eff = 0.5;
  bool enabled = false;

  void validate() const;
  static NoiseModel off() { return NoiseModel{0.5, false}; }
  static NoiseModel on(double n_eff) { return NoiseModel{n_eff, true}; }
};

/// Recorded intracavity amplitude on a uniform time grid t_i = i * dt.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::complex<double>> alpha;
  DriveEnvelope envelope;
  std::uint64_t seed = 0;

  std::size_t size() const { return alpha.size(); }
};

/// Default integration step 0.01 / kappa_tot.
double default_dt(const CavityConfig& config);
/// Largest accepted integration step 0.05 / kappa_tot.
double max_dt(const CavityConfig& config);

/// Time stepper for
///   d alpha = {[i(Delta(t) - K|alpha|^2) - kappa/2] alpha + sqrt(kappa_ext) alpha_in(t)} dt
///             + sqrt(kappa n_eff / 2) (dW_x + i dW_y).
///
/// The drift is advanced with classical RK4; with noise enabled an independent Gaussian
/// increment is added after each drift step (strong order 1 for additive noise). The step is
/// shrunk to dt_eff = T / ceil(T / dt) so the grid ends exactly at the envelope duration.
class LangevinStepper {
 public:
  LangevinStepper(const CavityConfig& config, const DriveEnvelope& envelope,
                  const NoiseModel& noise, double dt, std::uint64_t seed,
                  std::complex<double> alpha0);

  std::size_t total_steps() const { return steps_; }
  std::size_t index() const { return index_; }
  bool done() const { return index_ >= steps_; }
  double dt() const { return dt_; }
  double time() const { return static_cast<double>(index_) * dt_; }
  std::complex<double> alpha() const { return alpha_; }
  /// Input amplitude at the current time.
  double input_amplitude() const { return envelope_.at(time()).amplitude; }

  /// Advances one step. Throws NumericalError when the state becomes non-finite.
  void advance();

 private:
  std::complex<double> drift(double t, std::complex<double> a, std::size_t* cursor) const;

  CavityConfig config_;
  DriveEnvelope envelope_;
  double dt_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t index_ = 0;
  std::size_t cursor_ = 0;
  std::complex<double> alpha_;
  double noise_scale_ = 0.0;
  bool noisy_ = false;
  Rng rng_;
  double sqrt_kappa_ext_ = 0.0;
};

/// Integrates the Langevin equation over the whole envelope and records every step.
Trajectory integrate(const CavityConfig& config, const DriveEnvelope& envelope,
                     const NoiseModel& noise, double dt, std::uint64_t seed,
                     std::complex<double> alpha0);

struct HysteresisOptions {
  double delta = 0.0;        ///< drive detuning, rad/s
  double p_min_dbm = -140.0;
  double p_max_dbm = -109.0;
  double t_ramp = 2e-6;      ///< duration of each ramp direction, s
  int repetitions = 1;
  NoiseModel noise;
  double t_acq_per_point = 20e-9;  ///< averaging time of one power point, s
  std::uint64_t seed = 0;
  double dt = 0.0;           ///< 0 selects default_dt
  unsigned threads = 1;
};

struct HysteresisRow {
  double p_dbm = 0.0;
  double phase_fwd_deg = 0.0;
  double phase_rev_deg = 0.0;
};

struct HysteresisResult {
  std::vector<HysteresisRow> rows;  ///< ascending in power
  /// Trapezoidal integral of |phase_fwd - phase_rev| (deg) over power (dB).
  double loop_area = 0.0;
};

/// Triangular amplitude ramp p_min -> p_max -> p_min (linear in amplitude), starting from an
/// empty cavity. Each power point is the circular mean over repetitions of the phase
/// demodulated (without chain noise) over one t_acq_per_point interval.
HysteresisResult hysteresis_ramp(const CavityConfig& config, const HysteresisOptions& options);

/// Absolute phase difference integrated over power for a hysteresis table.
double loop_area(std::span<const HysteresisRow> rows);

struct DwellStats {
  double mean_high = 0.0;  ///< s
  double mean_low = 0.0;   ///< s
  std::size_t switches = 0;
  double time_high = 0.0;  ///< total classified time in the high state, s
  double time_low = 0.0;
  bool censored = false;   ///< at least one state was never left
};

/// Dwell-time statistics of a photon-number series at a constant drive with stable photon
/// numbers n_low < n_high. A sample switches state only once it crosses 20% of the branch
/// separation past the midpoint. Mean lifetimes are total time in a state divided by the
/// number of exits from it (the exponential estimator under right-censoring); a state that is
/// never left reports its total time and sets `censored`.
DwellStats dwell_times(std::span<const double> photon_numbers, double dt, double n_low,
                       double n_high);

/// Dwell times of a trajectory recorded at a constant bistable drive.
/// Throws NoBistability when the drive has a single steady state.
DwellStats dwell_times(const Trajectory& trajectory, const CavityConfig& config,
                       const Drive& drive);

}  // namespace ccpt
