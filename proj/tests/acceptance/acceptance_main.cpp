// Acceptance suite: one PASS/FAIL line per criterion.
//   ccpt_acceptance            run everything
//   ccpt_acceptance --only ID  run one criterion
//   ccpt_acceptance --list     print the criterion ids

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ccpt/dynamics.hpp"
#include "ccpt/errors.hpp"
#include "ccpt/measurement.hpp"
#include "ccpt/model.hpp"
#include "ccpt/protocol.hpp"
#include "ccpt/steady_state.hpp"
#include "ccpt/units.hpp"
#include "config.hpp"
#include "oracles.hpp"

namespace {

using namespace ccpt;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string_view id;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double kappa_from(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return hz_to_angular(0.2e6 + 3e6 * u(gen));
}

Outcome cubic_exactness() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int count_mismatch = 0;
  int value_mismatch = 0;
  int bistable = 0;
  double worst_residual = 0.0;
  constexpr int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const double kappa = kappa_from(gen);
    const double ke = kappa * (0.05 + 0.95 * u(gen));
    const double kerr = (u(gen) < 0.5 ? -1.0 : 1.0) * kappa * std::pow(10.0, -3.0 + 2.5 * u(gen));
    const double delta = kappa * (-12.0 + 24.0 * u(gen));
    const double n_in_c = kappa * kappa * kappa / (3.0 * std::sqrt(3.0) * std::abs(kerr) * ke);
    const double n_in = n_in_c * std::pow(10.0, -1.0 + 2.5 * u(gen));
    const CavityConfig c{1e10, kerr, kappa - ke, ke};
    const auto roots = photon_number_roots(c, Drive::at_detuning(c, delta, n_in));
    const auto oracle = testing::scan_roots(kerr, delta, kappa, ke, n_in);
    if (roots.size() != oracle.size()) {
      ++count_mismatch;
      continue;
    }
    if (roots.size() == 3) ++bistable;
    for (std::size_t k = 0; k < roots.size(); ++k) {
      const double res = std::abs(testing::cubic_value(kerr, delta, kappa, ke, n_in, roots[k].n)) /
                         testing::cubic_scale(kerr, delta, kappa, ke, n_in, roots[k].n);
      worst_residual = std::max(worst_residual, res);
      if (std::abs(roots[k].n - oracle[k]) > 1e-7 * oracle[k]) ++value_mismatch;
    }
  }
  const bool pass = count_mismatch == 0 && value_mismatch == 0 && worst_residual < 1e-9;
  return {pass, fmt("%d draws (%d bistable), count mismatches %d, value mismatches %d, max rel residual %.2e",
                    draws, bistable, count_mismatch, value_mismatch, worst_residual)};
}

Outcome critical_point_check() {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  double worst_mid = 0.0;
  constexpr int configs = 200;
  for (int i = 0; i < configs; ++i) {
    const double kappa = kappa_from(gen);
    const double ke = kappa * (0.05 + 0.95 * u(gen));
    const double kerr = (u(gen) < 0.5 ? -1.0 : 1.0) * kappa * std::pow(10.0, -3.0 + 2.5 * u(gen));
    const CavityConfig c{1e10, kerr, kappa - ke, ke};
    const CriticalPoint cp = critical_point(c);
    const double n_in_c = kappa * kappa * kappa / (3.0 * std::sqrt(3.0) * std::abs(kerr) * ke);
    const double delta_c = (kerr > 0 ? 1.0 : -1.0) * std::sqrt(3.0) / 2.0 * kappa;
    const BistableRegion above = bistable_region(c, 1.01 * cp.n_in_c);
    const BistableRegion below = bistable_region(c, 0.99 * cp.n_in_c);
    const double mid = 0.5 * (above.delta_lower + above.delta_upper);
    const double mid_err = std::abs(mid - delta_c) / std::abs(delta_c);
    worst_mid = std::max(worst_mid, mid_err);
    if (!above.exists || below.exists || mid_err > 0.02 || std::abs(cp.n_in_c - n_in_c) > 1e-12 * n_in_c ||
        std::abs(cp.delta_c - delta_c) > 1e-12 * std::abs(delta_c)) {
      ++failures;
    }
  }
  return {failures == 0, fmt("%d configs, failures %d, worst midpoint error %.3f%%", configs, failures,
                             100.0 * worst_mid)};
}

Outcome reflection_identities() {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_lossless = 0.0;
  double worst_critical = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double kappa = kappa_from(gen);
    const double kerr = kappa * (-0.1 + 0.2 * u(gen));
    const CavityConfig lossless{1e10, kerr, 0.0, kappa};
    const Drive d = Drive::at_detuning(lossless, kappa * (-10.0 + 20.0 * u(gen)), 1e9 * u(gen));
    const double n = 1e3 * u(gen);
    worst_lossless = std::max(worst_lossless, std::abs(std::abs(reflection_coefficient(lossless, d, n)) - 1.0));
    // Critical coupling on effective resonance: n chosen so that Delta - K n = 0.
    const CavityConfig critical{1e10, kerr, 0.5 * kappa, 0.5 * kappa};
    const Drive on_res{critical.omega0 + kappa * (-5.0 + 10.0 * u(gen)), 1e8};
    const double n_res = on_res.detuning(critical) / kerr;
    worst_critical = std::max(worst_critical, std::abs(reflection_coefficient(critical, on_res, n_res)));
  }
  return {worst_lossless < 1e-12 && worst_critical < 1e-12,
          fmt("max ||S11|-1| lossless %.2e, max |S11| at critical coupling %.2e", worst_lossless,
              worst_critical)};
}

Outcome deterministic_dynamics() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  double worst_stable = 0.0;
  double least_escape = 1e300;
  constexpr int configs = 100;
  for (int i = 0; i < configs; ++i) {
    const double kappa = kappa_from(gen);
    const double ke = kappa * (0.3 + 0.7 * u(gen));
    const double kerr = (u(gen) < 0.5 ? -1.0 : 1.0) * kappa * std::pow(10.0, -2.0 + 1.5 * u(gen));
    const CavityConfig c{hz_to_angular(5.8e9), kerr, kappa - ke, ke};
    const double n_in = critical_point(c).n_in_c * (2.0 + 18.0 * u(gen));
    const BistableRegion r = bistable_region(c, n_in);
    const double delta = r.delta_lower + (0.3 + 0.4 * u(gen)) * r.width();
    const Drive drive = Drive::at_detuning(c, delta, n_in);
    const auto roots = photon_number_roots(c, drive);
    if (roots.size() != 3) {
      ++failures;
      continue;
    }
    // The slowest linear rate (relaxation into the nodes, escape from the saddle) sets the
    // integration time.
    const auto root_of_growth = [&](const BranchSolution& root) {
      const double g = kerr * kerr * root.n * root.n - std::pow(delta - 2.0 * kerr * root.n, 2);
      return g > 0.0 ? std::sqrt(g) : 0.0;
    };
    double slowest = kappa;
    for (const auto& root : {roots.front(), roots.back()}) slowest = std::min(slowest, 0.5 * kappa - root_of_growth(root));
    slowest = std::min(slowest, root_of_growth(roots[1]) - 0.5 * kappa);
    const double duration = std::max(100.0 / kappa, 40.0 / slowest);
    DriveEnvelope env;
    env.hold(duration, delta, std::sqrt(n_in));
    for (std::size_t k = 0; k < 3; ++k) {
      const std::complex<double> start = roots[k].alpha * std::complex<double>(1.0 + 1e-3, -1e-3);
      const Trajectory tr = integrate(c, env, NoiseModel::off(), default_dt(c), 1, start);
      const double n_end = std::norm(tr.alpha.back());
      if (roots[k].stable) {
        const double err = std::abs(tr.alpha.back() - roots[k].alpha) / std::abs(roots[k].alpha);
        worst_stable = std::max(worst_stable, err);
        if (err > 1e-6) ++failures;
      } else {
        const double escape = std::abs(tr.alpha.back() - roots[1].alpha) / std::abs(start - roots[1].alpha);
        least_escape = std::min(least_escape, escape);
        const bool settled = std::abs(n_end - roots[0].n) < 1e-6 * roots[2].n ||
                             std::abs(n_end - roots[2].n) < 1e-6 * roots[2].n;
        if (escape < 100.0 || !settled) ++failures;
      }
    }
  }
  return {failures == 0, fmt("%d bistable configs, failures %d, worst stable-root error %.2e, "
                             "smallest growth of the unstable-root perturbation %.0fx",
                             configs, failures, worst_stable, least_escape)};
}

CavityConfig calibrated_cavity(const std::string& config_file, std::size_t bias_index) {
  const cli::RunConfig cfg = cli::load_config(config_file);
  return cfg.cavity(cfg.biases.at(bias_index));
}

Outcome hysteresis_reproduction() {
  const cli::RunConfig cfg = cli::load_config(CCPT_CONFIG_DIR "/hysteresis.json");
  const CavityConfig c = cfg.cavity(cfg.biases.at(0));
  std::vector<double> noisy;
  std::vector<double> clean;
  for (std::size_t i = 0; i < cfg.hysteresis.t_ramp_s.size(); ++i) {
    HysteresisOptions opt;
    opt.delta = hz_to_angular(cfg.hysteresis.detuning_hz);
    opt.p_min_dbm = cfg.hysteresis.p_min_dbm;
    opt.p_max_dbm = cfg.hysteresis.p_max_dbm;
    opt.t_ramp = cfg.hysteresis.t_ramp_s[i];
    opt.t_acq_per_point = opt.t_ramp / 100.0;
    opt.repetitions = std::max(cfg.hysteresis.repetitions, 500);
    opt.noise = cfg.noise_model();
    opt.seed = derive_seed(cfg.run.seed, 0, i);
    opt.threads = 0;
    noisy.push_back(hysteresis_ramp(c, opt).loop_area);
    opt.repetitions = 1;
    opt.noise = NoiseModel::off();
    clean.push_back(hysteresis_ramp(c, opt).loop_area);
  }
  bool monotone = noisy.size() == 4;
  for (std::size_t i = 1; i < noisy.size(); ++i) monotone = monotone && noisy[i] < noisy[i - 1];
  const auto [lo, hi] = std::minmax_element(clean.begin(), clean.end());
  const double spread = (*hi - *lo) / *lo;
  std::ostringstream d;
  d << "t_ramp 2/8/16/28 us, 500 reps: noisy areas";
  for (const double a : noisy) d << ' ' << fmt("%.0f", a);
  d << (monotone ? " (monotone decrease)" : " (NOT monotone)") << "; noise-off areas";
  for (const double a : clean) d << ' ' << fmt("%.0f", a);
  d << fmt(" (spread %.1f%%, limit 1%%)", 100.0 * spread);
  return {monotone && spread <= 0.01, d.str()};
}

Outcome sigmoid_width() {
  std::vector<double> x;
  std::vector<double> p;
  for (int i = 0; i <= 60; ++i) {
    x.push_back(hz_to_angular(-8e6 + i * 0.1e6));
    p.push_back(sigmoid(x.back(), hz_to_angular(-5e6), hz_to_angular(1.9e6)));
  }
  const SigmoidFit fit = fit_sigmoid(x, p);
  const double hi = fit(fit.delta0 + 0.5 * fit.gamma);
  const double lo = fit(fit.delta0 - 0.5 * fit.gamma);
  const double factor_err = std::abs(kSigmoidWidthFactor - 2.0 * std::log(9.0));
  const bool pass = std::abs(hi - 0.9) < 1e-6 && std::abs(lo - 0.1) < 1e-6 && factor_err < 1e-12 &&
                    std::abs(fit.gamma / hz_to_angular(1.9e6) - 1.0) < 1e-6;
  return {pass, fmt("P(d0+g/2) = %.9f, P(d0-g/2) = %.9f, factor %.6f, fitted gamma/true - 1 = %.1e", hi, lo,
                    kSigmoidWidthFactor, fit.gamma / hz_to_angular(1.9e6) - 1.0)};
}

Outcome fidelity_oracle() {
  std::mt19937_64 gen(36);
  const auto draw = [&](double mu) {
    std::normal_distribution<double> dist(mu, 12.0);
    PhaseHistogram h;
    for (int i = 0; i < 20000; ++i) h.add(wrap_deg(dist(gen)));
    return h;
  };
  const PhaseHistogram a = draw(-40.0);
  const PhaseHistogram b = draw(-4.0);
  const FidelityReport r = fidelity(a, b);
  const double expected = testing::gaussian_overlap_fidelity(36.0, 12.0);
  const double rel = std::abs(r.f_avg - expected) / expected;
  return {rel < 0.005 && std::abs(expected - 0.9332) < 1e-4,
          fmt("f_avg %.4f vs analytic %.4f (rel. error %.3f%%, limit 0.5%%), separation %.2f deg", r.f_avg,
              expected, 100.0 * rel, r.separation)};
}

Outcome sensitivity_number() {
  const double s = charge_sensitivity(0.09, 3e-6);
  const std::string four = fmt("%.4e", s);
  return {four == "1.5588e-04", "charge_sensitivity(0.09 e, 3 us) = " + four + " e/sqrt(Hz)"};
}

Outcome calibrated_end_to_end() {
  cli::RunConfig cfg = cli::load_config(CCPT_CONFIG_DIR "/compare.json");
  cfg.protocol.n_tot = 2000;
  const CavityConfig a = cfg.cavity(cfg.biases.at(0));
  const CavityConfig b = cfg.cavity(cfg.biases.at(1));
  std::vector<double> freqs;
  for (const double f : cfg.drive.frequency_grid->values()) freqs.push_back(hz_to_angular(f));
  const CompareResult r = compare_bias(a, b, cfg.drive.power_dbm, freqs, cfg.protocol, cfg.noise_model(),
                                       cfg.amplifier(), cfg.run.seed, SenseOptions{0.0, 0});
  const double kerr_hz = angular_to_hz(calibrated_cavity(CCPT_CONFIG_DIR "/device.json", 0).kerr);
  const double kappa_hz = angular_to_hz(a.kappa_tot());
  const bool calibration = std::abs(kerr_hz + 470e3) < 1e3 && std::abs(kappa_hz - 1.5e6) < 1e3;
  const bool contrast_ok = r.contrast.max_contrast > 0.9;
  const bool fidelity_ok = r.fidelity.f_avg >= 0.9;
  const bool occupancy_ok = r.occupancy_b >= 15.0 && r.occupancy_b <= 25.0;
  return {calibration && contrast_ok && fidelity_ok && occupancy_ok,
          fmt("n_tot 2000: contrast %.3f (>0.9 %s) at %.4f GHz, f_avg %.4f (>=0.9 %s), "
              "high-branch occupancy at n_g=0.71 %.2f photons (15-25 %s), K(0,0)/2pi %.1f kHz",
              r.contrast.max_contrast, contrast_ok ? "ok" : "FAIL", angular_to_hz(r.contrast.x_opt) * 1e-9,
              r.fidelity.f_avg, fidelity_ok ? "ok" : "FAIL", r.occupancy_b, occupancy_ok ? "ok" : "FAIL",
              kerr_hz * 1e-3)};
}

Outcome band_structure() {
  const cli::RunConfig cfg = cli::load_config(CCPT_CONFIG_DIR "/device.json");
  const auto kerr_at = [&](double phi) { return resolve_bias(cfg.device, BiasPoint{0.0, phi}).kerr; };
  const double k0 = kerr_at(0.0);
  const double k_half = kerr_at(0.5);
  double lo = 0.0;
  double hi = 0.5;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((kerr_at(mid) < 0.0) == (k0 < 0.0) ? lo : hi) = mid;
  }
  const double crossing = 0.5 * (lo + hi);
  const double k0_hz = angular_to_hz(k0);
  const bool pass = (k0 < 0.0) != (k_half < 0.0) && std::abs(crossing - 0.25) <= 0.05 &&
                    std::abs(k0_hz / -470e3 - 1.0) <= 0.10;
  return {pass, fmt("K(0,0)/2pi %.1f kHz, K(0,0.5)/2pi %.1f kHz, zero crossing at phi_ext %.4f", k0_hz * 1e-3,
                    angular_to_hz(k_half) * 1e-3, crossing)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"cubic_exactness", 10.0, cubic_exactness},
      {"critical_point", 10.0, critical_point_check},
      {"reflection_identities", 1.0, reflection_identities},
      {"deterministic_dynamics", 60.0, deterministic_dynamics},
      {"hysteresis_reproduction", 600.0, hysteresis_reproduction},
      {"sigmoid_width", 1.0, sigmoid_width},
      {"fidelity_oracle", 10.0, fidelity_oracle},
      {"sensitivity_number", 1.0, sensitivity_number},
      {"calibrated_end_to_end", 1800.0, calibrated_end_to_end},
      {"band_structure", 10.0, band_structure},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::string_view only;
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--list") {
      for (const auto& c : criteria()) std::printf("%.*s\n", static_cast<int>(c.id.size()), c.id.data());
      return 0;
    }
    if (arg == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--list | --only ID]\n", argv[0]);
      return 2;
    }
  }

  int failed = 0;
  int ran = 0;
  for (const auto& c : criteria()) {
    if (!only.empty() && c.id != only) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = elapsed <= c.budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) ++failed;
    std::printf("%s %.*s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", static_cast<int>(c.id.size()),
                c.id.data(), o.detail.c_str(), elapsed, c.budget_s, in_budget ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%.*s'\n", static_cast<int>(only.size()), only.data());
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
