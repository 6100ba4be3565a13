#include "ccpt/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/steady_state.hpp"

namespace ccpt {

void NoiseModel::validate() const {
  if (!std::isfinite(n_eff)) throw InvalidArgument("n_eff must be finite");
  if (enabled && n_eff < 0.5) throw InvalidArgument("n_eff must be >= 0.5 (vacuum floor)");
}

double default_dt(const CavityConfig& config) { return 0.01 / config.kappa_tot(); }

double max_dt(const CavityConfig& config) { return 0.05 / config.kappa_tot(); }

LangevinStepper::LangevinStepper(const CavityConfig& config, const DriveEnvelope& envelope,
                                 const NoiseModel& noise, double dt, std::uint64_t seed,
                                 std::complex<double> alpha0)
    : config_(config), envelope_(envelope), alpha_(alpha0), rng_(seed) {
  config_.validate();
  envelope_.validate();
  noise.validate();
  if (!(dt > 0.0) || dt > max_dt(config_) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " s violates 0 < dt <= 0.05/kappa_tot = " << max_dt(config_) << " s";
    throw InvalidArgument(msg.str());
  }
  if (!std::isfinite(alpha0.real()) || !std::isfinite(alpha0.imag())) {
    throw InvalidArgument("initial amplitude must be finite");
  }
  const double total = envelope_.duration();
  steps_ = static_cast<std::size_t>(std::ceil(total / dt - 1e-9));
  if (steps_ == 0) steps_ = 1;
  dt_ = total / static_cast<double>(steps_);
  noisy_ = noise.enabled;
  noise_scale_ = std::sqrt(0.5 * config_.kappa_tot() * noise.n_eff * dt_);
  sqrt_kappa_ext_ = std::sqrt(config_.kappa_ext);
}

std::complex<double> LangevinStepper::drift(double t, std::complex<double> a,
                                            std::size_t* cursor) const {
  const DriveEnvelope::Sample s = envelope_.at(t, cursor);
  const double n = std::norm(a);
  return std::complex<double>(-0.5 * config_.kappa_tot(), s.detuning - config_.kerr * n) * a +
         sqrt_kappa_ext_ * s.amplitude;
}

void LangevinStepper::advance() {
  if (done()) return;
  const double t = time();
  const double h = dt_;
  const std::complex<double> k1 = drift(t, alpha_, &cursor_);
  const std::complex<double> k2 = drift(t + 0.5 * h, alpha_ + 0.5 * h * k1, &cursor_);
  const std::complex<double> k3 = drift(t + 0.5 * h, alpha_ + 0.5 * h * k2, &cursor_);
  const std::complex<double> k4 = drift(t + h, alpha_ + h * k3, &cursor_);
  alpha_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (noisy_) {
    const double wx = rng_.gaussian();
    const double wy = rng_.gaussian();
    alpha_ += noise_scale_ * std::complex<double>(wx, wy);
  }
  ++index_;
  if (!std::isfinite(alpha_.real()) || !std::isfinite(alpha_.imag())) {
    std::ostringstream msg;
    msg << "non-finite intracavity amplitude at step " << index_ << " (t = " << time() << " s)";
    throw NumericalError(msg.str());
  }
}

Trajectory integrate(const CavityConfig& config, const DriveEnvelope& envelope,
                     const NoiseModel& noise, double dt, std::uint64_t seed,
                     std::complex<double> alpha0) {
  LangevinStepper stepper(config, envelope, noise, dt, seed, alpha0);
  Trajectory traj;
  traj.dt = stepper.dt();
  traj.envelope = envelope;
  traj.seed = seed;
  traj.times.reserve(stepper.total_steps() + 1);
  traj.alpha.reserve(stepper.total_steps() + 1);
  traj.times.push_back(0.0);
  traj.alpha.push_back(alpha0);
  while (!stepper.done()) {
    stepper.advance();
    traj.times.push_back(stepper.time());
    traj.alpha.push_back(stepper.alpha());
  }
  return traj;
}

DwellStats dwell_times(std::span<const double> photon_numbers, double dt, double n_low,
                       double n_high) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(n_high > n_low)) throw InvalidArgument("n_high must exceed n_low");
  const double mid = 0.5 * (n_low + n_high);
  const double band = 0.2 * (n_high - n_low);
  const double up = mid + band;
  const double down = mid - band;

  enum class State { unknown, low, high };
  State state = State::unknown;
  std::size_t exits_high = 0;
  std::size_t exits_low = 0;
  DwellStats stats;
  for (const double n : photon_numbers) {
    if (state != State::high && n >= up) {
      if (state == State::low) ++exits_low;
      state = State::high;
    } else if (state != State::low && n <= down) {
      if (state == State::high) ++exits_high;
      state = State::low;
    }
    if (state == State::high) stats.time_high += dt;
    if (state == State::low) stats.time_low += dt;
  }
  stats.switches = exits_high + exits_low;
  stats.censored = exits_high == 0 || exits_low == 0;
  stats.mean_high = exits_high > 0 ? stats.time_high / static_cast<double>(exits_high) : stats.time_high;
  stats.mean_low = exits_low > 0 ? stats.time_low / static_cast<double>(exits_low) : stats.time_low;
  return stats;
}

DwellStats dwell_times(const Trajectory& trajectory, const CavityConfig& config,
                       const Drive& drive) {
  const std::vector<BranchSolution> roots = photon_number_roots(config, drive);
  if (roots.size() != 3) {
    throw NoBistability("dwell-time analysis needs a bistable drive; this drive has one steady state");
  }
  std::vector<double> n(trajectory.alpha.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = std::norm(trajectory.alpha[i]);
  return dwell_times(n, trajectory.dt, roots.front().n, roots.back().n);
}

}  // namespace ccpt
