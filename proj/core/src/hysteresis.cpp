#include <cmath>
#include <complex>
#include <numbers>

#include "ccpt/dynamics.hpp"
#include "ccpt/errors.hpp"
#include "ccpt/measurement.hpp"
#include "ccpt/parallel.hpp"
#include "ccpt/steady_state.hpp"

namespace ccpt {

double loop_area(std::span<const HysteresisRow> rows) {
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double d0 = std::abs(wrap_deg(rows[k].phase_fwd_deg - rows[k].phase_rev_deg));
    const double d1 = std::abs(wrap_deg(rows[k + 1].phase_fwd_deg - rows[k + 1].phase_rev_deg));
    area += 0.5 * (d0 + d1) * (rows[k + 1].p_dbm - rows[k].p_dbm);
  }
  return area;
}

HysteresisResult hysteresis_ramp(const CavityConfig& config, const HysteresisOptions& options) {
  config.validate();
  options.noise.validate();
  if (!(options.p_min_dbm < options.p_max_dbm)) throw InvalidArgument("hysteresis needs p_min < p_max");
  if (options.repetitions < 1) throw InvalidArgument("hysteresis needs at least one repetition");
  if (!(options.t_ramp > 0.0) || !(options.t_acq_per_point > 0.0)) {
    throw InvalidArgument("t_ramp and t_acq_per_point must be positive");
  }
  const auto points = static_cast<std::size_t>(std::llround(options.t_ramp / options.t_acq_per_point));
  if (points < 2) throw InvalidArgument("t_ramp must span at least two acquisition points");

  const double omega_d = config.omega0 + options.delta;
  const double a_min = std::sqrt(dbm_to_photon_flux(options.p_min_dbm, omega_d));
  const double a_max = std::sqrt(dbm_to_photon_flux(options.p_max_dbm, omega_d));
  DriveEnvelope envelope;
  envelope.ramp(options.t_ramp, options.delta, options.delta, a_min, a_max)
      .ramp(options.t_ramp, options.delta, options.delta, a_max, a_min);

  const double dt = options.dt > 0.0 ? options.dt : default_dt(config);
  const double period = options.t_ramp / static_cast<double>(points);
  const AmplifierChain chain = AmplifierChain::ideal(period);
  const auto reps = static_cast<std::size_t>(options.repetitions);

  std::vector<std::vector<double>> phases(reps);
  parallel_for(reps, options.threads, [&](std::size_t rep) {
    LangevinStepper stepper(config, envelope, options.noise, dt, derive_seed(options.seed, rep),
                            {0.0, 0.0});
    Demodulator demod(config, chain, 0.0, 2.0 * options.t_ramp, 0);
    std::size_t cursor = 0;
    demod.add(0.0, stepper.alpha(), envelope.at(0.0, &cursor).amplitude);
    while (!stepper.done()) {
      stepper.advance();
      const double t = stepper.time();
      demod.add(t, stepper.alpha(), envelope.at(t, &cursor).amplitude);
    }
    phases[rep] = demod.finish();
    if (phases[rep].size() != 2 * points) {
      throw NumericalError("hysteresis ramp produced an incomplete set of power points");
    }
  });

  HysteresisResult result;
  result.rows.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    std::complex<double> fwd;
    std::complex<double> rev;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      fwd += std::polar(1.0, phases[rep][k] * std::numbers::pi / 180.0);
      rev += std::polar(1.0, phases[rep][2 * points - 1 - k] * std::numbers::pi / 180.0);
    }
    const double amp = a_min + (a_max - a_min) * (static_cast<double>(k) + 0.5) / static_cast<double>(points);
    HysteresisRow& row = result.rows[k];
    row.p_dbm = photon_flux_to_dbm(amp * amp, omega_d);
    row.phase_fwd_deg = phase_deg(fwd);
    row.phase_rev_deg = phase_deg(rev);
  }
  result.loop_area = loop_area(result.rows);
  return result;
}

}  // namespace ccpt
