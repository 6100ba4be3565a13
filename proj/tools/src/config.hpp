#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccpt/model.hpp"
#include "ccpt/protocol.hpp"

namespace ccpt::cli {

/// Schema violation in a run configuration. `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Evenly spaced grid in Hz, endpoints included.
struct GridSpec {
  double start_hz = 0.0;
  double stop_hz = 0.0;
  int points = 1;

  std::vector<double> values() const;
};

/// Directly specified oscillator parameters that bypass the band-structure mapping.
struct OscillatorOverride {
  double f0_hz = 0.0;
  double kerr_hz = 0.0;
};

struct BiasEntry {
  std::string name;
  BiasPoint bias;
  std::optional<DampingOverride> damping;  ///< rad/s
  std::optional<OscillatorOverride> oscillator;
};

struct DriveSpec {
  double power_dbm = -128.0;
  std::optional<GridSpec> detuning_grid;   ///< relative to each bias's resonance
  std::optional<GridSpec> frequency_grid;  ///< absolute drive frequencies
};

struct BiasMapSpec {
  GridSpec n_g;
  GridSpec phi_ext;
};

struct HysteresisSpec {
  double detuning_hz = -9.5e6;
  double p_min_dbm = -140.0;
  double p_max_dbm = -109.0;
  std::vector<double> t_ramp_s{2e-6, 8e-6, 16e-6, 28e-6};
  int repetitions = 500;
  double t_acq_per_point_s = 0.0;  ///< 0 selects t_ramp / 100
};

struct NoiseSpec {
  bool enabled = true;
  double n_eff = 1.0;
  double added_noise_density = 4.67;
  double sample_period_s = 100e-9;
  bool idealized = false;
};

struct SensitivitySpec {
  double delta_ng = 0.09;
  double t_acq_s = 3e-6;
};

struct CompareSpec {
  std::vector<double> t_acq_sweep_s;
};

struct RunSpec {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  double dt_s = 0.0;  ///< 0 selects the integrator default
  unsigned threads = 0;
  bool dump_trajectory = false;
};

/// Fully resolved run configuration. Physical quantities are stored in SI/angular units.
struct RunConfig {
  DeviceParams device = DeviceParams::nominal();
  std::vector<BiasEntry> biases;
  DriveSpec drive;
  std::optional<BiasMapSpec> bias_map;
  HysteresisSpec hysteresis;
  NoiseSpec noise;
  SenseProtocol protocol;
  SensitivitySpec sensitivity;
  CompareSpec compare;
  RunSpec run;

  CavityConfig cavity(const BiasEntry& entry) const;
  NoiseModel noise_model() const;
  AmplifierChain amplifier() const;
};

/// Parses a configuration document. Every key is optional and defaults to the nominal
/// device; unknown keys and wrongly typed values raise ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Canonical JSON echo of a configuration, in the same schema parse_config accepts.
/// Execution-only settings (output directory, thread count) are omitted.
nlohmann::json to_json(const RunConfig& config);

}  // namespace ccpt::cli
