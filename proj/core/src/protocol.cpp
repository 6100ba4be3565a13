#include "ccpt/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/parallel.hpp"
#include "ccpt/rng.hpp"
#include "ccpt/steady_state.hpp"

namespace ccpt {
namespace {

double resolve_dt(const CavityConfig& config, double dt) { return dt > 0.0 ? dt : default_dt(config); }

}  // namespace

void SenseProtocol::validate() const {
  for (double v : {f_ramp, t_r, t_stab, f_latch, t_acq, t_down}) {
    if (!std::isfinite(v)) throw InvalidArgument("sense protocol values must be finite");
  }
  if (!(t_r > 0.0) || !(t_stab > 0.0) || !(t_acq > 0.0)) {
    throw InvalidArgument("t_r, t_stab and t_acq must be positive");
  }
  if (t_down < 0.0) throw InvalidArgument("t_down must be >= 0");
  if (n_tot < 1) throw InvalidArgument("n_tot must be >= 1");
}

DriveEnvelope SenseProtocol::envelope(double final_detuning, double amplitude) const {
  validate();
  DriveEnvelope env;
  env.ramp(t_r, delta_start(final_detuning), final_detuning, amplitude, amplitude)
      .hold(t_stab, final_detuning, amplitude);
  if (f_latch == 0.0) {
    env.hold(t_acq, final_detuning, amplitude);
  } else {
    env.step_hold(t_acq, final_detuning + f_latch, amplitude);
  }
  return env;
}

std::vector<double> sense_once_multi(const CavityConfig& config, double power_dbm,
                                     double final_detuning, const SenseProtocol& proto,
                                     const NoiseModel& noise, const AmplifierChain& chain,
                                     std::uint64_t seed, std::span<const double> t_acq_list,
                                     double dt) {
  if (t_acq_list.empty()) throw InvalidArgument("no acquisition times requested");
  SenseProtocol shot = proto;
  shot.t_acq = *std::max_element(t_acq_list.begin(), t_acq_list.end());
  const double omega_d = config.omega0 + final_detuning;
  const double amplitude = std::sqrt(dbm_to_photon_flux(power_dbm, omega_d));
  const DriveEnvelope env = shot.envelope(final_detuning, amplitude);
  const TimeWindow window = shot.acquisition_window();

  LangevinStepper stepper(config, env, noise, resolve_dt(config, dt), derive_seed(seed, 0), {0.0, 0.0});
  Demodulator demod(config, chain, window.t_start, window.t_end, derive_seed(seed, 1));
  const double skip_before = window.t_start - 2.0 * stepper.dt();
  std::size_t cursor = 0;
  while (!stepper.done()) {
    stepper.advance();
    const double t = stepper.time();
    if (t >= skip_before) demod.add(t, stepper.alpha(), env.at(t, &cursor).amplitude);
  }
  const std::vector<double> phases = demod.finish();

  std::vector<double> out;
  out.reserve(t_acq_list.size());
  for (const double t_acq : t_acq_list) out.push_back(averaged_phase(phases, chain.sample_period, t_acq));
  return out;
}

double sense_once(const CavityConfig& config, double power_dbm, double final_detuning,
                  const SenseProtocol& proto, const NoiseModel& noise, const AmplifierChain& chain,
                  std::uint64_t seed, double dt) {
  const double t_acq[] = {proto.t_acq};
  return sense_once_multi(config, power_dbm, final_detuning, proto, noise, chain, seed, t_acq, dt).front();
}

BranchPhases branch_priors(const CavityConfig& config, const Drive& drive) {
  const std::vector<BranchSolution> roots = photon_number_roots(config, drive);
  BranchPhases prior;
  if (roots.size() == 3) {
    prior.high_deg = phase_deg(roots.back().s11);
    prior.low_deg = phase_deg(roots.front().s11);
    return prior;
  }
  const BranchSolution& only = roots.front();
  const double phase = phase_deg(only.s11);
  const double opposite = wrap_deg(phase + 180.0);
  prior.high_deg = only.label == Branch::high ? phase : opposite;
  prior.low_deg = only.label == Branch::high ? opposite : phase;
  return prior;
}

SCurveResult s_curve(const CavityConfig& config, double power_dbm, std::span<const double> detuning_grid,
                     const SenseProtocol& proto, const NoiseModel& noise, const AmplifierChain& chain,
                     std::uint64_t master_seed, const SenseOptions& options) {
  proto.validate();
  chain.validate();
  if (detuning_grid.empty()) throw InvalidArgument("detuning grid is empty");
  if (!std::is_sorted(detuning_grid.begin(), detuning_grid.end())) {
    throw InvalidArgument("detuning grid must be sorted ascending");
  }
  const std::size_t points = detuning_grid.size();
  const auto reps = static_cast<std::size_t>(proto.n_tot);
  const double dt = resolve_dt(config, options.dt);

  std::vector<double> phases(points * reps);
  parallel_for(points * reps, options.threads, [&](std::size_t item) {
    const std::size_t i = item / reps;
    const std::size_t rep = item % reps;
    phases[item] = sense_once(config, power_dbm, detuning_grid[i], proto, noise, chain,
                              derive_seed(master_seed, i, rep), dt);
  });

  SCurveResult result;
  result.curve.detunings.assign(detuning_grid.begin(), detuning_grid.end());
  result.curve.p_high.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double omega_d = config.omega0 + detuning_grid[i];
    const Drive drive{omega_d, dbm_to_photon_flux(power_dbm, omega_d)};
    PhaseHistogram hist = PhaseHistogram::from_samples(std::span(phases).subspan(i * reps, reps));
    const BranchPhases prior = branch_priors(config, drive);
    DoubleGaussFit fit;
    if (hist.n_tot() >= 100) {
      fit = fit_double_gaussian(hist);
    } else {
      fit.mu1 = fit.mu2 = averaged_phase(std::span(phases).subspan(i * reps, reps));
      fit.single_peak = true;
    }
    result.curve.p_high[i] = std::clamp(extract_p_high(fit, prior), 0.0, 1.0);
    result.histograms.push_back(std::move(hist));
    result.fits.push_back(fit);
    result.priors.push_back(prior);
  }

  if (config.kerr != 0.0) {
    const double omega_ref = config.omega0 + detuning_grid.front();
    result.below_critical = dbm_to_photon_flux(power_dbm, omega_ref) <= critical_point(config).n_in_c;
  } else {
    result.below_critical = true;
  }

  try {
    result.curve.fit = fit_sigmoid(result.curve.detunings, result.curve.p_high);
  } catch (const NumericalError& e) {
    result.fit_error = e.what();
  }
  return result;
}

CompareResult compare_bias(const CavityConfig& config_a, const CavityConfig& config_b, double power_dbm,
                           std::span<const double> frequency_grid, const SenseProtocol& proto,
                           const NoiseModel& noise, const AmplifierChain& chain, std::uint64_t seed,
                           const SenseOptions& options, std::span<const double> t_acq_sweep) {
  proto.validate();
  if (frequency_grid.empty()) throw InvalidArgument("frequency grid is empty");
  CompareResult result;
  result.frequencies.assign(frequency_grid.begin(), frequency_grid.end());

  std::vector<double> det_a(frequency_grid.size());
  std::vector<double> det_b(frequency_grid.size());
  for (std::size_t i = 0; i < frequency_grid.size(); ++i) {
    det_a[i] = frequency_grid[i] - config_a.omega0;
    det_b[i] = frequency_grid[i] - config_b.omega0;
  }
  result.a = s_curve(config_a, power_dbm, det_a, proto, noise, chain, derive_seed(seed, 0), options);
  result.b = s_curve(config_b, power_dbm, det_b, proto, noise, chain, derive_seed(seed, 1), options);
  result.contrast = contrast(result.frequencies, result.a.curve.p_high, result.b.curve.p_high);
  result.low_distinguishability = result.contrast.max_contrast < 0.5;

  const double omega_opt = result.contrast.x_opt;
  std::vector<double> t_acq_list{proto.t_acq};
  for (const double t : t_acq_sweep) {
    if (!(t > 0.0)) throw InvalidArgument("acquisition times must be positive");
    t_acq_list.push_back(t);
  }
  const std::size_t n_acq = t_acq_list.size();
  const auto reps = static_cast<std::size_t>(proto.n_tot);
  const double dt_a = resolve_dt(config_a, options.dt);
  const double dt_b = resolve_dt(config_b, options.dt);

  std::vector<double> shots(2 * reps * n_acq);
  parallel_for(2 * reps, options.threads, [&](std::size_t item) {
    const bool first = item < reps;
    const std::size_t rep = first ? item : item - reps;
    const CavityConfig& cfg = first ? config_a : config_b;
    const std::vector<double> ph =
        sense_once_multi(cfg, power_dbm, omega_opt - cfg.omega0, proto, noise, chain,
                         derive_seed(seed, first ? 2 : 3, rep), t_acq_list, first ? dt_a : dt_b);
    std::copy(ph.begin(), ph.end(), shots.begin() + static_cast<std::ptrdiff_t>(item * n_acq));
  });

  const auto histogram_for = [&](bool first, std::size_t acq) {
    PhaseHistogram h;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::size_t item = (first ? 0 : reps) + rep;
      h.add(shots[item * n_acq + acq]);
    }
    return h;
  };
  result.hist_a = histogram_for(true, 0);
  result.hist_b = histogram_for(false, 0);
  result.fidelity = fidelity(result.hist_a, result.hist_b);
  for (std::size_t acq = 1; acq < n_acq; ++acq) {
    result.fidelity_vs_t_acq.push_back(
        FidelityPoint{t_acq_list[acq], fidelity(histogram_for(true, acq), histogram_for(false, acq))});
  }

  result.occupancy_a = high_branch_occupancy(config_a, power_dbm, omega_opt - config_a.omega0);
  result.occupancy_b = high_branch_occupancy(config_b, power_dbm, omega_opt - config_b.omega0);
  return result;
}

double high_branch_occupancy(const CavityConfig& config, double power_dbm, double detuning) {
  const double omega_d = config.omega0 + detuning;
  const Drive drive{omega_d, dbm_to_photon_flux(power_dbm, omega_d)};
  const std::vector<BranchSolution> roots = photon_number_roots(config, drive);
  return roots.back().n;
}

double low_branch_occupancy(const CavityConfig& config, double power_dbm, double detuning) {
  const double omega_d = config.omega0 + detuning;
  const Drive drive{omega_d, dbm_to_photon_flux(power_dbm, omega_d)};
  return photon_number_roots(config, drive).front().n;
}

}  // namespace ccpt
