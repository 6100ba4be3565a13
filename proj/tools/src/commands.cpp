#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

#include "artifacts.hpp"
#include "ccpt/dynamics.hpp"
#include "ccpt/errors.hpp"
#include "ccpt/measurement.hpp"
#include "ccpt/parallel.hpp"
#include "ccpt/protocol.hpp"
#include "ccpt/rng.hpp"
#include "ccpt/steady_state.hpp"
#include "ccpt/units.hpp"

namespace ccpt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::array<std::string_view, 7> kSubcommands{"resolve-bias", "response", "critical", "hysteresis",
                                                       "s-curve",      "compare",  "sensitivity"};

/// Re-raises numerical failures with the name of the module that produced them.
template <class F>
auto in_module(std::string_view module, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const NoCriticalPoint& e) {
    throw NoCriticalPoint(std::string(module) + ": " + e.what());
  } catch (const NoBistability& e) {
    throw NoBistability(std::string(module) + ": " + e.what());
  } catch (const IllConditionedFit& e) {
    throw IllConditionedFit(std::string(module) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(module) + ": " + e.what());
  }
}

struct Context {
  const RunConfig& cfg;
  RunStamp stamp;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& warn;
  std::vector<fs::path> written;

  fs::path path(std::string_view stem, std::string_view suffix) {
    fs::path p = artifact_path(out_dir, stem, stamp, suffix);
    written.push_back(p);
    return p;
  }

  json provenance() const {
    return json{{"tool", std::string(kToolName)},
                {"version", std::string(tool_version())},
                {"config_hash", stamp.hash},
                {"seed", stamp.seed},
                {"config", json::parse(stamp.config_json)}};
  }
};

void require_biases(const RunConfig& cfg, std::size_t count, std::string_view command) {
  if (cfg.biases.size() < count) {
    throw ConfigError("biases", std::string(command) + " needs at least " + std::to_string(count) +
                                    " bias entr" + (count == 1 ? "y" : "ies"));
  }
}

/// Drive detunings (rad/s) relative to the given cavity, from whichever grid the config supplies.
std::vector<double> detuning_grid(const RunConfig& cfg, const CavityConfig& cavity, std::string_view command) {
  std::vector<double> out;
  if (cfg.drive.detuning_grid) {
    for (const double d : cfg.drive.detuning_grid->values()) out.push_back(hz_to_angular(d));
  } else if (cfg.drive.frequency_grid) {
    for (const double f : cfg.drive.frequency_grid->values()) out.push_back(hz_to_angular(f) - cavity.omega0);
  } else {
    throw ConfigError("drive", std::string(command) + " needs drive.detuning_grid or drive.frequency_grid");
  }
  return out;
}

void warn_poisoning(Context& ctx, const BiasEntry& b) {
  if (b.bias.poisoning_risk()) {
    ctx.warn << "warning: bias '" << b.name << "' has |n_g| = " << std::abs(b.bias.n_g)
             << " > 0.71; quasiparticle poisoning is likely\n";
  }
}

SenseOptions sense_options(const RunConfig& cfg) { return SenseOptions{cfg.run.dt_s, cfg.run.threads}; }

void write_scurve(Context& ctx, const fs::path& path, const SCurveResult& r, std::span<const double> detunings,
                  double omega0) {
  CsvWriter csv(path, ctx.stamp,
                {"delta_hz", "frequency_hz", "p_high", "p_fit", "fit_delta0_hz", "fit_gamma_hz"});
  const double nan = std::nan("");
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    const double x = detunings[i];
    const auto& fit = r.curve.fit;
    csv.row() << angular_to_hz(x) << angular_to_hz(omega0 + x) << r.curve.p_high[i] << (fit ? (*fit)(x) : nan)
              << (fit ? angular_to_hz(fit->delta0) : nan) << (fit ? angular_to_hz(fit->gamma) : nan);
  }
  csv.close();
}

void dump_trajectory(Context& ctx, const BiasEntry& b, const CavityConfig& cavity, double final_detuning,
                     std::uint64_t seed) {
  const RunConfig& cfg = ctx.cfg;
  const double omega_d = cavity.omega0 + final_detuning;
  const double amplitude = std::sqrt(dbm_to_photon_flux(cfg.drive.power_dbm, omega_d));
  const DriveEnvelope env = cfg.protocol.envelope(final_detuning, amplitude);
  const double dt = cfg.run.dt_s > 0.0 ? cfg.run.dt_s : default_dt(cavity);
  const Trajectory traj =
      in_module("dynamics", [&] { return integrate(cavity, env, cfg.noise_model(), dt, seed, {0.0, 0.0}); });
  CsvWriter csv(ctx.path("trajectory", "_" + b.name + ".csv"), ctx.stamp,
                {"t_s", "re_alpha", "im_alpha", "n", "phase_out_deg"});
  const double sqrt_ke = std::sqrt(cavity.kappa_ext);
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    const double in = traj.envelope.at(t, &cursor).amplitude;
    const std::complex<double> a = traj.alpha[i];
    const std::complex<double> out_field = in - sqrt_ke * a;
    const double phase = (in == 0.0 || std::abs(out_field) == 0.0) ? std::nan("")
                                                                     : phase_deg(std::conj(out_field / in));
    csv.row() << t << a.real() << a.imag() << std::norm(a) << phase;
  }
  csv.close();
}

void cmd_resolve_bias(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (cfg.biases.empty() && !cfg.bias_map) {
    throw ConfigError("biases", "resolve-bias needs at least one bias entry or a bias_map");
  }
  if (!cfg.biases.empty()) {
    CsvWriter csv(ctx.path("resolve-bias", "_biases.csv"), ctx.stamp,
                  {"name", "n_g", "phi_ext", "f0_hz", "kerr_hz", "kappa_int_hz", "kappa_ext_hz", "poisoning_risk"});
    for (const auto& b : cfg.biases) {
      warn_poisoning(ctx, b);
      const CavityConfig c = in_module("model", [&] { return cfg.cavity(b); });
      csv.row() << b.name << b.bias.n_g << b.bias.phi_ext << angular_to_hz(c.omega0) << angular_to_hz(c.kerr)
                << angular_to_hz(c.kappa_int) << angular_to_hz(c.kappa_ext) << b.bias.poisoning_risk();
      ctx.out << b.name << ": f0 = " << format_number(angular_to_hz(c.omega0))
              << " Hz, K/2pi = " << format_number(angular_to_hz(c.kerr)) << " Hz\n";
    }
    csv.close();
  }
  if (cfg.bias_map) {
    const std::vector<double> ngs = cfg.bias_map->n_g.values();
    const std::vector<double> phis = cfg.bias_map->phi_ext.values();
    const double nan = std::nan("");
    std::vector<CavityConfig> grid(ngs.size() * phis.size());
    std::vector<char> singular(grid.size(), 0);
    parallel_for(grid.size(), cfg.run.threads, [&](std::size_t k) {
      try {
        grid[k] = resolve_bias(cfg.device, BiasPoint{ngs[k / phis.size()], phis[k % phis.size()]});
      } catch (const NumericalError&) {
        grid[k].omega0 = nan;
        grid[k].kerr = nan;
        singular[k] = 1;
      }
    });
    const auto n_singular = std::count(singular.begin(), singular.end(), 1);
    if (n_singular > 0) {
      ctx.warn << "warning: " << n_singular
               << " bias map point(s) at or next to a band degeneracy have unresolved phase derivatives; "
                  "reported as nan\n";
    }
    CsvWriter csv(ctx.path("resolve-bias", "_map.csv"), ctx.stamp,
                  {"n_g", "phi_ext", "f0_hz", "kerr_hz", "poisoning_risk"});
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const BiasPoint bp{ngs[k / phis.size()], phis[k % phis.size()]};
      csv.row() << bp.n_g << bp.phi_ext << angular_to_hz(grid[k].omega0) << angular_to_hz(grid[k].kerr)
                << bp.poisoning_risk();
    }
    csv.close();
    ctx.out << "bias map: " << grid.size() << " points\n";
  }
}

void cmd_response(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_biases(cfg, 1, "response");
  for (const auto& b : cfg.biases) {
    warn_poisoning(ctx, b);
    const CavityConfig c = in_module("model", [&] { return cfg.cavity(b); });
    const std::vector<double> grid = detuning_grid(cfg, c, "response");
    const double n_in = dbm_to_photon_flux(cfg.drive.power_dbm, c.omega0);
    const auto curve = in_module("steady_state", [&] { return response_curve(c, n_in, grid); });
    CsvWriter csv(ctx.path("response", "_" + b.name + ".csv"), ctx.stamp,
                  {"delta_hz", "branch", "n", "s11_mag", "s11_phase_deg", "stable"});
    std::size_t bistable = 0;
    for (const auto& point : curve) {
      if (point.branches.size() == 3) ++bistable;
      for (const auto& br : point.branches) {
        const double phase = std::abs(br.s11) == 0.0 ? std::nan("") : phase_deg(br.s11);
        csv.row() << angular_to_hz(point.delta) << to_string(br.label) << br.n << std::abs(br.s11) << phase
                  << br.stable;
      }
    }
    csv.close();
    ctx.out << b.name << ": " << curve.size() << " detunings, " << bistable << " bistable\n";
  }
}

void cmd_critical(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_biases(cfg, 1, "critical");
  CsvWriter csv(ctx.path("critical", ".csv"), ctx.stamp,
                {"name", "kerr_hz", "delta_c_hz", "p_c_w", "p_c_dbm", "n_in_c", "power_dbm", "bistable",
                 "delta_lower_hz", "delta_upper_hz"});
  for (const auto& b : cfg.biases) {
    warn_poisoning(ctx, b);
    const CavityConfig c = in_module("model", [&] { return cfg.cavity(b); });
    const CriticalPoint cp = in_module("steady_state", [&] {
      try {
        return critical_point(c);
      } catch (const NoCriticalPoint& e) {
        throw NoCriticalPoint("bias '" + b.name + "': " + e.what());
      }
    });
    const double n_in = dbm_to_photon_flux(cfg.drive.power_dbm, c.omega0);
    const BistableRegion region = in_module("steady_state", [&] { return bistable_region(c, n_in); });
    const double nan = std::nan("");
    csv.row() << b.name << angular_to_hz(c.kerr) << angular_to_hz(cp.delta_c) << cp.p_c
              << 10.0 * std::log10(cp.p_c / 1e-3) << cp.n_in_c << cfg.drive.power_dbm << region.exists
              << (region.exists ? angular_to_hz(region.delta_lower) : nan)
              << (region.exists ? angular_to_hz(region.delta_upper) : nan);
    ctx.out << b.name << ": delta_c/2pi = " << format_number(angular_to_hz(cp.delta_c))
            << " Hz, P_c = " << format_number(10.0 * std::log10(cp.p_c / 1e-3)) << " dBm, bistable at "
            << cfg.drive.power_dbm << " dBm: " << (region.exists ? "yes" : "no") << '\n';
  }
  csv.close();
}

void cmd_hysteresis(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_biases(cfg, 1, "hysteresis");
  const auto& h = cfg.hysteresis;
  CsvWriter summary(ctx.path("hysteresis", "_summary.csv"), ctx.stamp,
                    {"name", "t_ramp_s", "repetitions", "loop_area_deg_db"});
  for (std::size_t bi = 0; bi < cfg.biases.size(); ++bi) {
    const auto& b = cfg.biases[bi];
    warn_poisoning(ctx, b);
    const CavityConfig c = in_module("model", [&] { return cfg.cavity(b); });
    for (std::size_t ti = 0; ti < h.t_ramp_s.size(); ++ti) {
      HysteresisOptions opt;
      opt.delta = hz_to_angular(h.detuning_hz);
      opt.p_min_dbm = h.p_min_dbm;
      opt.p_max_dbm = h.p_max_dbm;
      opt.t_ramp = h.t_ramp_s[ti];
      opt.repetitions = h.repetitions;
      opt.noise = cfg.noise_model();
      opt.t_acq_per_point = h.t_acq_per_point_s > 0.0 ? h.t_acq_per_point_s : h.t_ramp_s[ti] / 100.0;
      opt.seed = derive_seed(cfg.run.seed, bi, ti);
      opt.dt = cfg.run.dt_s;
      opt.threads = cfg.run.threads;
      const HysteresisResult r = in_module("dynamics", [&] { return hysteresis_ramp(c, opt); });
      char tag[64];
      std::snprintf(tag, sizeof tag, "_%s_tramp%.0fns.csv", b.name.c_str(), h.t_ramp_s[ti] * 1e9);
      CsvWriter csv(ctx.path("hysteresis", tag), ctx.stamp, {"p_dbm", "phase_fwd_deg", "phase_rev_deg"});
      for (const auto& row : r.rows) csv.row() << row.p_dbm << row.phase_fwd_deg << row.phase_rev_deg;
      csv.close();
      summary.row() << b.name << h.t_ramp_s[ti] << h.repetitions << r.loop_area;
      ctx.out << b.name << ": t_ramp = " << format_number(h.t_ramp_s[ti])
              << " s, loop area = " << format_number(r.loop_area) << " deg*dB\n";
    }
  }
  summary.close();
}

void cmd_s_curve(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_biases(cfg, 1, "s-curve");
  for (std::size_t bi = 0; bi < cfg.biases.size(); ++bi) {
    const auto& b = cfg.biases[bi];
    warn_poisoning(ctx, b);
    const CavityConfig c = in_module("model", [&] { return cfg.cavity(b); });
    const std::vector<double> grid = detuning_grid(cfg, c, "s-curve");
    const std::uint64_t seed = derive_seed(cfg.run.seed, bi);
    const SCurveResult r = in_module("protocol", [&] {
      return s_curve(c, cfg.drive.power_dbm, grid, cfg.protocol, cfg.noise_model(), cfg.amplifier(), seed,
                     sense_options(cfg));
    });
    if (r.below_critical) {
      ctx.warn << "warning: bias '" << b.name << "': drive power is below the bistability threshold\n";
    }
    if (!r.fit_error.empty()) ctx.warn << "warning: bias '" << b.name << "': sigmoid fit: " << r.fit_error << '\n';
    write_scurve(ctx, ctx.path("s-curve", "_" + b.name + ".csv"), r, grid, c.omega0);
    ctx.out << b.name << ": " << grid.size() << " detunings x " << cfg.protocol.n_tot << " shots";
    if (r.curve.fit) {
      ctx.out << ", delta0/2pi = " << format_number(angular_to_hz(r.curve.fit->delta0))
              << " Hz, gamma/2pi = " << format_number(angular_to_hz(r.curve.fit->gamma)) << " Hz";
    }
    ctx.out << '\n';
    if (cfg.run.dump_trajectory) dump_trajectory(ctx, b, c, grid[grid.size() / 2], derive_seed(seed, 0, 0));
  }
}

json report_json(const FidelityReport& f) {
  return json{{"phi_th_deg", f.phi_th},          {"f_a", f.f_a},
              {"f_b", f.f_b},                    {"f_avg", f.f_avg},
              {"separation_deg", f.separation},  {"gauss_width_deg", f.gauss_width},
              {"center_a_deg", f.center_a},      {"center_b_deg", f.center_b},
              {"flagged", f.flagged}};
}

void cmd_compare(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  require_biases(cfg, 2, "compare");
  if (!cfg.drive.frequency_grid) {
    throw ConfigError("drive.frequency_grid", "compare needs an absolute frequency grid");
  }
  const auto& ba = cfg.biases[0];
  const auto& bb = cfg.biases[1];
  warn_poisoning(ctx, ba);
  warn_poisoning(ctx, bb);
  const CavityConfig ca = in_module("model", [&] { return cfg.cavity(ba); });
  const CavityConfig cb = in_module("model", [&] { return cfg.cavity(bb); });
  std::vector<double> freqs;
  for (const double f : cfg.drive.frequency_grid->values()) freqs.push_back(hz_to_angular(f));

  const CompareResult r = in_module("protocol", [&] {
    return compare_bias(ca, cb, cfg.drive.power_dbm, freqs, cfg.protocol, cfg.noise_model(), cfg.amplifier(),
                        cfg.run.seed, sense_options(cfg), cfg.compare.t_acq_sweep_s);
  });

  std::vector<double> det_a;
  std::vector<double> det_b;
  for (const double w : freqs) {
    det_a.push_back(w - ca.omega0);
    det_b.push_back(w - cb.omega0);
  }
  for (const auto* side : {&r.a, &r.b}) {
    const bool first = side == &r.a;
    const auto& b = first ? ba : bb;
    if (!side->fit_error.empty()) ctx.warn << "warning: bias '" << b.name << "': sigmoid fit: " << side->fit_error << '\n';
    write_scurve(ctx, ctx.path("compare", "_scurve_" + b.name + ".csv"), *side, first ? det_a : det_b,
                 first ? ca.omega0 : cb.omega0);
  }

  CsvWriter hist(ctx.path("compare", "_histogram.csv"), ctx.stamp, {"phase_deg_bin_center", "count_a", "count_b"});
  for (std::size_t i = 0; i < r.hist_a.bins(); ++i) {
    hist.row() << r.hist_a.bin_center(i) << static_cast<std::size_t>(r.hist_a.counts()[i])
               << static_cast<std::size_t>(r.hist_b.counts()[i]);
  }
  hist.close();

  if (!r.fidelity_vs_t_acq.empty()) {
    CsvWriter sweep(ctx.path("compare", "_fidelity_vs_t_acq.csv"), ctx.stamp,
                    {"t_acq_s", "f_a", "f_b", "f_avg", "separation_deg", "gauss_width_deg"});
    for (const auto& p : r.fidelity_vs_t_acq) {
      sweep.row() << p.t_acq << p.report.f_a << p.report.f_b << p.report.f_avg << p.report.separation
                  << p.report.gauss_width;
    }
    sweep.close();
  }

  json doc = ctx.provenance();
  doc["fidelity"] = report_json(r.fidelity);
  doc["t_acq_s"] = cfg.protocol.t_acq;
  doc["bias_a"] = ba.name;
  doc["bias_b"] = bb.name;
  doc["max_contrast"] = r.contrast.max_contrast;
  doc["optimal_frequency_hz"] = angular_to_hz(r.contrast.x_opt);
  doc["low_distinguishability"] = r.low_distinguishability;
  doc["occupancy_a"] = r.occupancy_a;
  doc["occupancy_b"] = r.occupancy_b;
  json sweep = json::array();
  for (const auto& p : r.fidelity_vs_t_acq) {
    json e = report_json(p.report);
    e["t_acq_s"] = p.t_acq;
    sweep.push_back(std::move(e));
  }
  doc["fidelity_vs_t_acq"] = std::move(sweep);
  write_json(ctx.path("compare", "_fidelity.json"), doc);

  if (r.low_distinguishability) ctx.warn << "warning: maximal contrast below 0.5; biases are hard to distinguish\n";
  if (r.fidelity.flagged) ctx.warn << "warning: phase histograms overlap; fidelity is not meaningful\n";
  ctx.out << "contrast = " << format_number(r.contrast.max_contrast) << " at "
          << format_number(angular_to_hz(r.contrast.x_opt)) << " Hz\n"
          << "fidelity: f_a = " << format_number(r.fidelity.f_a) << ", f_b = " << format_number(r.fidelity.f_b)
          << ", f_avg = " << format_number(r.fidelity.f_avg) << '\n'
          << "high-branch occupancy: " << ba.name << " = " << format_number(r.occupancy_a) << ", " << bb.name
          << " = " << format_number(r.occupancy_b) << '\n';
}

void cmd_sensitivity(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const double s = charge_sensitivity(cfg.sensitivity.delta_ng, cfg.sensitivity.t_acq_s);
  json doc = ctx.provenance();
  doc["delta_ng"] = cfg.sensitivity.delta_ng;
  doc["t_acq_s"] = cfg.sensitivity.t_acq_s;
  doc["charge_sensitivity_e_per_sqrt_hz"] = s;
  write_json(ctx.path("sensitivity", ".json"), doc);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4e", s);
  ctx.out << "charge sensitivity = " << buf << " e/sqrt(Hz)\n";
}

}  // namespace

void apply_overrides(RunConfig& config, const Overrides& o) {
  if (o.seed) config.run.seed = *o.seed;
  if (o.out_dir) config.run.out_dir = *o.out_dir;
  if (o.threads) config.run.threads = *o.threads;
  if (o.dt_s) {
    if (!(*o.dt_s >= 0.0)) throw ConfigError("--dt", "must be >= 0");
    config.run.dt_s = *o.dt_s;
  }
  if (o.n_tot) {
    if (*o.n_tot < 1) throw ConfigError("--n-tot", "must be >= 1");
    config.protocol.n_tot = *o.n_tot;
  }
  if (o.repetitions) {
    if (*o.repetitions < 1) throw ConfigError("--repetitions", "must be >= 1");
    config.hysteresis.repetitions = *o.repetitions;
  }
  if (o.delta_ng) {
    if (!(*o.delta_ng > 0.0)) throw ConfigError("--delta-ng", "must be > 0");
    config.sensitivity.delta_ng = *o.delta_ng;
  }
  if (o.t_acq_s) {
    if (!(*o.t_acq_s > 0.0)) throw ConfigError("--t-acq", "must be > 0");
    config.sensitivity.t_acq_s = *o.t_acq_s;
  }
  if (o.dump_trajectory) config.run.dump_trajectory = true;
}

std::span<const std::string_view> subcommand_names() { return kSubcommands; }

std::vector<fs::path> run_subcommand(std::string_view name, const RunConfig& config, std::ostream& out,
                                     std::ostream& warn) {
  static const std::map<std::string_view, std::function<void(Context&)>> table{
      {"resolve-bias", cmd_resolve_bias}, {"response", cmd_response}, {"critical", cmd_critical},
      {"hysteresis", cmd_hysteresis},     {"s-curve", cmd_s_curve},   {"compare", cmd_compare},
      {"sensitivity", cmd_sensitivity}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("<subcommand>", "unknown subcommand '" + std::string(name) + "'");

  const json canonical = to_json(config);
  RunStamp stamp{config_hash(canonical), config.run.seed, canonical.dump()};
  const fs::path dir(config.run.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("run.out_dir", "cannot create '" + dir.string() + "': " + ec.message());

  Context ctx{config, std::move(stamp), dir, out, warn, {}};
  it->second(ctx);
  return ctx.written;
}

}  // namespace ccpt::cli
