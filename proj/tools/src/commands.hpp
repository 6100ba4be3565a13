#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace ccpt::cli {

/// Command-line values that take precedence over the config document.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<double> dt_s;
  std::optional<int> n_tot;
  std::optional<int> repetitions;
  std::optional<double> delta_ng;
  std::optional<double> t_acq_s;
  bool dump_trajectory = false;
};

/// Applies overrides and re-validates the affected fields (throws ConfigError).
void apply_overrides(RunConfig& config, const Overrides& overrides);

std::span<const std::string_view> subcommand_names();

/// Runs one subcommand, writing artifacts to config.run.out_dir and a short summary to `out`.
/// Returns the artifact paths in write order. Throws ConfigError for missing inputs and
/// ccpt::NumericalError (message prefixed with the failing module) for numerical failures.
std::vector<std::filesystem::path> run_subcommand(std::string_view name, const RunConfig& config,
                                                  std::ostream& out, std::ostream& warn);

}  // namespace ccpt::cli
