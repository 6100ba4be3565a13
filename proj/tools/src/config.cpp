#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ccpt/errors.hpp"
#include "ccpt/units.hpp"

namespace ccpt::cli {
namespace {

using nlohmann::json;

/// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    const auto it = node_.find(key);
    if (it == node_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a finite number");
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// Rejects every key that was not consumed.
  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError(field(item.key()), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

GridSpec parse_grid(const json& node, const std::string& path, const char* unit) {
  Reader r(node, path);
  GridSpec g;
  g.start_hz = r.number(std::string("start") + unit, 0.0);
  g.stop_hz = r.number(std::string("stop") + unit, g.start_hz);
  const auto points = r.integer("points", 1);
  check(points >= 1 && points <= 1000000, r.field("points"), "must be in [1, 1000000]");
  g.points = static_cast<int>(points);
  check(g.points > 1 || g.start_hz == g.stop_hz, r.field("points"),
        "a single-point grid needs equal start and stop");
  r.finish();
  return g;
}

json grid_to_json(const GridSpec& g, const char* unit) {
  return json{{std::string("start") + unit, g.start_hz},
              {std::string("stop") + unit, g.stop_hz},
              {"points", g.points}};
}

void parse_device(const json& node, DeviceParams& d) {
  Reader r(node, "device");
  d.ej_hz = r.number("ej_hz", d.ej_hz);
  d.ec_hz = r.number("ec_hz", d.ec_hz);
  d.omega_bare = hz_to_angular(r.number("f_bare_hz", angular_to_hz(d.omega_bare)));
  d.phi_zp = r.number("phi_zp", d.phi_zp);
  const auto cutoff = r.integer("charge_cutoff", d.charge_cutoff);
  check(cutoff >= 3 && cutoff <= 1000, r.field("charge_cutoff"), "must be in [3, 1000]");
  d.charge_cutoff = static_cast<int>(cutoff);
  d.kappa_int = hz_to_angular(r.number("kappa_int_hz", angular_to_hz(d.kappa_int)));
  d.kappa_ext = hz_to_angular(r.number("kappa_ext_hz", angular_to_hz(d.kappa_ext)));
  r.finish();
  try {
    d.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("device", e.what());
  }
}

BiasEntry parse_bias(const json& node, const std::string& path, std::size_t index) {
  Reader r(node, path);
  BiasEntry b;
  b.name = r.string("name", "bias" + std::to_string(index));
  check(!b.name.empty() && b.name.find_first_of("/\\ \t\n") == std::string::npos, r.field("name"),
        "must be non-empty without whitespace or path separators");
  b.bias.n_g = r.number("n_g", 0.0);
  b.bias.phi_ext = r.number("phi_ext", 0.0);
  try {
    b.bias.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(path, e.what());
  }
  const bool has_int = r.has("kappa_int_hz");
  const bool has_ext = r.has("kappa_ext_hz");
  check(has_int == has_ext, path, "kappa_int_hz and kappa_ext_hz must be overridden together");
  if (has_int) {
    DampingOverride o;
    o.kappa_int = hz_to_angular(r.number("kappa_int_hz", 0.0));
    o.kappa_ext = hz_to_angular(r.number("kappa_ext_hz", 0.0));
    check(o.kappa_int >= 0.0, r.field("kappa_int_hz"), "must be >= 0");
    check(o.kappa_ext > 0.0, r.field("kappa_ext_hz"), "must be > 0");
    b.damping = o;
  }
  if (const json* osc = r.find("oscillator")) {
    Reader ro(*osc, r.field("oscillator"));
    OscillatorOverride o;
    check(ro.has("f0_hz") && ro.has("kerr_hz"), r.field("oscillator"), "needs both f0_hz and kerr_hz");
    o.f0_hz = ro.number("f0_hz", 0.0);
    o.kerr_hz = ro.number("kerr_hz", 0.0);
    check(o.f0_hz > 0.0, ro.field("f0_hz"), "must be > 0");
    ro.finish();
    b.oscillator = o;
  }
  r.finish();
  return b;
}

void parse_protocol(const json& node, SenseProtocol& p) {
  Reader r(node, "protocol");
  p.f_ramp = hz_to_angular(r.number("f_ramp_hz", angular_to_hz(p.f_ramp)));
  p.t_r = r.number("t_r_s", p.t_r);
  p.t_stab = r.number("t_stab_s", p.t_stab);
  p.f_latch = hz_to_angular(r.number("f_latch_hz", angular_to_hz(p.f_latch)));
  p.t_acq = r.number("t_acq_s", p.t_acq);
  p.t_down = r.number("t_down_s", p.t_down);
  const auto n_tot = r.integer("n_tot", p.n_tot);
  check(n_tot >= 1 && n_tot <= 100000000, r.field("n_tot"), "must be in [1, 1e8]");
  p.n_tot = static_cast<int>(n_tot);
  r.finish();
  try {
    p.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("protocol", e.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

std::vector<double> GridSpec::values() const {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] =
        points == 1 ? start_hz : start_hz + (stop_hz - start_hz) * i / static_cast<double>(points - 1);
  }
  return out;
}

CavityConfig RunConfig::cavity(const BiasEntry& entry) const {
  CavityConfig c;
  if (entry.oscillator) {
    c.omega0 = hz_to_angular(entry.oscillator->f0_hz);
    c.kerr = hz_to_angular(entry.oscillator->kerr_hz);
    c.kappa_int = entry.damping ? entry.damping->kappa_int : device.kappa_int;
    c.kappa_ext = entry.damping ? entry.damping->kappa_ext : device.kappa_ext;
    c.validate();
    return c;
  }
  return resolve_bias(device, entry.bias, entry.damping);
}

NoiseModel RunConfig::noise_model() const {
  return noise.enabled ? NoiseModel::on(noise.n_eff) : NoiseModel::off();
}

AmplifierChain RunConfig::amplifier() const {
  return AmplifierChain{noise.added_noise_density, noise.sample_period_s, noise.idealized};
}

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  Reader root(doc, "");

  if (const json* v = root.find("device")) parse_device(*v, cfg.device);

  if (const json* v = root.find("biases")) {
    check(v->is_array(), "biases", "expected an array of bias objects");
    std::set<std::string> names;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string path = "biases[" + std::to_string(i) + "]";
      BiasEntry b = parse_bias((*v)[i], path, i);
      check(names.insert(b.name).second, path + ".name", "duplicate bias name '" + b.name + "'");
      cfg.biases.push_back(std::move(b));
    }
  }

  if (const json* v = root.find("drive")) {
    Reader r(*v, "drive");
    cfg.drive.power_dbm = r.number("power_dbm", cfg.drive.power_dbm);
    if (const json* g = r.find("detuning_grid")) cfg.drive.detuning_grid = parse_grid(*g, "drive.detuning_grid", "_hz");
    if (const json* g = r.find("frequency_grid")) {
      cfg.drive.frequency_grid = parse_grid(*g, "drive.frequency_grid", "_hz");
      check(cfg.drive.frequency_grid->start_hz > 0.0 && cfg.drive.frequency_grid->stop_hz > 0.0,
            "drive.frequency_grid", "frequencies must be positive");
    }
    check(!(cfg.drive.detuning_grid && cfg.drive.frequency_grid), "drive",
          "give either detuning_grid or frequency_grid, not both");
    r.finish();
  }

  if (const json* v = root.find("bias_map")) {
    Reader r(*v, "bias_map");
    BiasMapSpec m;
    const json* ng = r.find("n_g");
    const json* phi = r.find("phi_ext");
    check(ng != nullptr && phi != nullptr, "bias_map", "needs both n_g and phi_ext grids");
    m.n_g = parse_grid(*ng, "bias_map.n_g", "");
    m.phi_ext = parse_grid(*phi, "bias_map.phi_ext", "");
    check(std::abs(m.n_g.start_hz) <= 1.0 && std::abs(m.n_g.stop_hz) <= 1.0, "bias_map.n_g",
          "gate charge must lie in [-1, 1]");
    r.finish();
    cfg.bias_map = m;
  }

  if (const json* v = root.find("hysteresis")) {
    Reader r(*v, "hysteresis");
    auto& h = cfg.hysteresis;
    h.detuning_hz = r.number("detuning_hz", h.detuning_hz);
    h.p_min_dbm = r.number("p_min_dbm", h.p_min_dbm);
    h.p_max_dbm = r.number("p_max_dbm", h.p_max_dbm);
    check(h.p_max_dbm > h.p_min_dbm, r.field("p_max_dbm"), "must exceed p_min_dbm");
    h.t_ramp_s = r.numbers("t_ramp_s", h.t_ramp_s);
    check(!h.t_ramp_s.empty(), r.field("t_ramp_s"), "needs at least one ramp time");
    for (const double t : h.t_ramp_s) check(t > 0.0, r.field("t_ramp_s"), "ramp times must be positive");
    const auto reps = r.integer("repetitions", h.repetitions);
    check(reps >= 1 && reps <= 10000000, r.field("repetitions"), "must be in [1, 1e7]");
    h.repetitions = static_cast<int>(reps);
    h.t_acq_per_point_s = r.number("t_acq_per_point_s", h.t_acq_per_point_s);
    check(h.t_acq_per_point_s >= 0.0, r.field("t_acq_per_point_s"), "must be >= 0");
    r.finish();
  }

  if (const json* v = root.find("noise")) {
    Reader r(*v, "noise");
    auto& n = cfg.noise;
    n.enabled = r.boolean("enabled", n.enabled);
    n.n_eff = r.number("n_eff", n.n_eff);
    n.added_noise_density = r.number("added_noise_density", n.added_noise_density);
    n.sample_period_s = r.number("sample_period_s", n.sample_period_s);
    n.idealized = r.boolean("idealized", n.idealized);
    r.finish();
  }
  try {
    cfg.noise_model().validate();
    cfg.amplifier().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("noise", e.what());
  }

  if (const json* v = root.find("protocol")) parse_protocol(*v, cfg.protocol);

  if (const json* v = root.find("sensitivity")) {
    Reader r(*v, "sensitivity");
    cfg.sensitivity.delta_ng = r.number("delta_ng", cfg.sensitivity.delta_ng);
    cfg.sensitivity.t_acq_s = r.number("t_acq_s", cfg.sensitivity.t_acq_s);
    check(cfg.sensitivity.delta_ng > 0.0, r.field("delta_ng"), "must be > 0");
    check(cfg.sensitivity.t_acq_s > 0.0, r.field("t_acq_s"), "must be > 0");
    r.finish();
  }

  if (const json* v = root.find("compare")) {
    Reader r(*v, "compare");
    cfg.compare.t_acq_sweep_s = r.numbers("t_acq_sweep_s", {});
    for (const double t : cfg.compare.t_acq_sweep_s) {
      check(t > 0.0, r.field("t_acq_sweep_s"), "acquisition times must be positive");
    }
    r.finish();
  }

  if (const json* v = root.find("run")) {
    Reader r(*v, "run");
    cfg.run.seed = r.unsigned_integer("seed", cfg.run.seed);
    cfg.run.out_dir = r.string("out_dir", cfg.run.out_dir);
    cfg.run.dt_s = r.number("dt_s", cfg.run.dt_s);
    check(cfg.run.dt_s >= 0.0, r.field("dt_s"), "must be >= 0");
    const auto threads = r.unsigned_integer("threads", cfg.run.threads);
    check(threads <= 4096, r.field("threads"), "must be <= 4096");
    cfg.run.threads = static_cast<unsigned>(threads);
    cfg.run.dump_trajectory = r.boolean("dump_trajectory", cfg.run.dump_trajectory);
    r.finish();
  }

  root.finish();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json doc;
  doc["device"] = {{"ej_hz", c.device.ej_hz},
                   {"ec_hz", c.device.ec_hz},
                   {"f_bare_hz", angular_to_hz(c.device.omega_bare)},
                   {"phi_zp", c.device.phi_zp},
                   {"charge_cutoff", c.device.charge_cutoff},
                   {"kappa_int_hz", angular_to_hz(c.device.kappa_int)},
                   {"kappa_ext_hz", angular_to_hz(c.device.kappa_ext)}};
  json biases = json::array();
  for (const auto& b : c.biases) {
    json e{{"name", b.name}, {"n_g", b.bias.n_g}, {"phi_ext", b.bias.phi_ext}};
    if (b.damping) {
      e["kappa_int_hz"] = angular_to_hz(b.damping->kappa_int);
      e["kappa_ext_hz"] = angular_to_hz(b.damping->kappa_ext);
    }
    if (b.oscillator) e["oscillator"] = {{"f0_hz", b.oscillator->f0_hz}, {"kerr_hz", b.oscillator->kerr_hz}};
    biases.push_back(std::move(e));
  }
  doc["biases"] = std::move(biases);
  json drive{{"power_dbm", c.drive.power_dbm}};
  if (c.drive.detuning_grid) drive["detuning_grid"] = grid_to_json(*c.drive.detuning_grid, "_hz");
  if (c.drive.frequency_grid) drive["frequency_grid"] = grid_to_json(*c.drive.frequency_grid, "_hz");
  doc["drive"] = std::move(drive);
  if (c.bias_map) {
    doc["bias_map"] = {{"n_g", grid_to_json(c.bias_map->n_g, "")},
                       {"phi_ext", grid_to_json(c.bias_map->phi_ext, "")}};
  }
  const auto& h = c.hysteresis;
  doc["hysteresis"] = {{"detuning_hz", h.detuning_hz},      {"p_min_dbm", h.p_min_dbm},
                       {"p_max_dbm", h.p_max_dbm},          {"t_ramp_s", h.t_ramp_s},
                       {"repetitions", h.repetitions},      {"t_acq_per_point_s", h.t_acq_per_point_s}};
  doc["noise"] = {{"enabled", c.noise.enabled},
                  {"n_eff", c.noise.n_eff},
                  {"added_noise_density", c.noise.added_noise_density},
                  {"sample_period_s", c.noise.sample_period_s},
                  {"idealized", c.noise.idealized}};
  const auto& p = c.protocol;
  doc["protocol"] = {{"f_ramp_hz", angular_to_hz(p.f_ramp)}, {"t_r_s", p.t_r},
                     {"t_stab_s", p.t_stab},                 {"f_latch_hz", angular_to_hz(p.f_latch)},
                     {"t_acq_s", p.t_acq},                   {"t_down_s", p.t_down},
                     {"n_tot", p.n_tot}};
  doc["sensitivity"] = {{"delta_ng", c.sensitivity.delta_ng}, {"t_acq_s", c.sensitivity.t_acq_s}};
  doc["compare"] = {{"t_acq_sweep_s", c.compare.t_acq_sweep_s}};
  doc["run"] = {{"seed", c.run.seed}, {"dt_s", c.run.dt_s}, {"dump_trajectory", c.run.dump_trajectory}};
  return doc;
}

}  // namespace ccpt::cli
