#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "artifacts.hpp"
#include "ccpt/errors.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kNumerical = 2 };

}  // namespace

int main(int argc, char** argv) {
  using namespace ccpt::cli;

  CLI::App app{"Simulate cavity-embedded Cooper pair transistor charge sensing", std::string(kToolName)};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned threads = 0;
  double dt = 0.0;
  int n_tot = 0;
  int repetitions = 0;
  double delta_ng = 0.0;
  double t_acq = 0.0;

  const std::map<std::string_view, std::string> help{
      {"resolve-bias", "resonance frequency and Kerr coefficient per bias point or over a bias map"},
      {"response", "steady-state branches versus drive detuning"},
      {"critical", "critical point and bistable detuning window"},
      {"hysteresis", "power-ramp hysteresis loops for several ramp times"},
      {"s-curve", "switching probability versus detuning"},
      {"compare", "contrast and readout fidelity between two bias points"},
      {"sensitivity", "charge sensitivity from gate difference and acquisition time"}};
  for (const auto name : subcommand_names()) {
    CLI::App* sub = app.add_subcommand(std::string(name), help.at(name));
    sub->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master RNG seed");
    sub->add_option("--out-dir", out_dir, "directory for artifacts");
    sub->add_option("--threads", threads, "worker thread cap (0 = all cores)");
    sub->add_option("--dt", dt, "integration step in seconds (0 = default)");
    if (name == "s-curve" || name == "compare") {
      sub->add_option("--n-tot", n_tot, "shots per detuning");
    }
    if (name == "s-curve") {
      sub->add_flag("--dump-trajectory", overrides.dump_trajectory, "write one shot trajectory per bias");
    }
    if (name == "hysteresis") sub->add_option("--repetitions", repetitions, "ramps per ramp time");
    if (name == "sensitivity") {
      sub->add_option("--delta-ng", delta_ng, "gate charge difference (units of e)");
      sub->add_option("--t-acq", t_acq, "acquisition time in seconds");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const auto given = [&](const char* flag) {
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--seed")) overrides.seed = seed;
  if (given("--out-dir")) overrides.out_dir = out_dir;
  if (given("--threads")) overrides.threads = threads;
  if (given("--dt")) overrides.dt_s = dt;
  if (given("--n-tot")) overrides.n_tot = n_tot;
  if (given("--repetitions")) overrides.repetitions = repetitions;
  if (given("--delta-ng")) overrides.delta_ng = delta_ng;
  if (given("--t-acq")) overrides.t_acq_s = t_acq;

  try {
    RunConfig config = load_config(config_path);
    apply_overrides(config, overrides);
    for (const auto& path : run_subcommand(command, config, std::cout, std::cerr)) {
      std::cout << "wrote " << path.string() << '\n';
    }
    return kSuccess;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kUsage;
  } catch (const ccpt::InvalidArgument& e) {
    std::cerr << "error: invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const ccpt::NumericalError& e) {
    std::cerr << "error: numerical failure in " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
