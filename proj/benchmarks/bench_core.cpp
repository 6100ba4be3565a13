#include <benchmark/benchmark.h>

#include <cmath>

#include "ccpt/dynamics.hpp"
#include "ccpt/model.hpp"
#include "ccpt/protocol.hpp"
#include "ccpt/steady_state.hpp"

namespace {

using namespace ccpt;

CavityConfig cavity() {
  return CavityConfig{hz_to_angular(5.8e9), hz_to_angular(-690e3), hz_to_angular(0.05e6), hz_to_angular(1.45e6)};
}

void BM_GroundEnergy(benchmark::State& state) {
  const int cutoff = static_cast<int>(state.range(0));
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cpt_ground_energy(14.8e9, 54.1e9, 0.62, phi, cutoff));
    phi += 1e-3;
  }
}
BENCHMARK(BM_GroundEnergy)->Arg(5)->Arg(10)->Arg(20);

void BM_ResolveBias(benchmark::State& state) {
  const DeviceParams dev = DeviceParams::nominal();
  for (auto _ : state) benchmark::DoNotOptimize(resolve_bias(dev, BiasPoint{0.62, 0.0}));
}
BENCHMARK(BM_ResolveBias);

void BM_PhotonNumberRoots(benchmark::State& state) {
  const CavityConfig c = cavity();
  const double n_in = 5.0 * critical_point(c).n_in_c;
  double delta = hz_to_angular(-8e6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(photon_number_roots(c, Drive::at_detuning(c, delta, n_in)));
    delta = delta > hz_to_angular(2e6) ? hz_to_angular(-8e6) : delta + hz_to_angular(1e3);
  }
}
BENCHMARK(BM_PhotonNumberRoots);

void BM_StepperSteps(benchmark::State& state) {
  const CavityConfig c = cavity();
  DriveEnvelope env;
  env.hold(1e-3, hz_to_angular(-4e6), 5000.0);
  const NoiseModel noise = state.range(0) ? NoiseModel::on(1.0) : NoiseModel::off();
  LangevinStepper stepper(c, env, noise, default_dt(c), 1, {});
  for (auto _ : state) {
    if (stepper.done()) stepper = LangevinStepper(c, env, noise, default_dt(c), 1, {});
    stepper.advance();
    benchmark::DoNotOptimize(stepper.alpha());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StepperSteps)->Arg(0)->Arg(1);

void BM_SenseShot(benchmark::State& state) {
  const CavityConfig c = cavity();
  const SenseProtocol proto;
  const AmplifierChain chain{};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sense_once(c, -128.0, hz_to_angular(-4e6), proto, NoiseModel::on(1.0), chain, ++seed));
  }
}
BENCHMARK(BM_SenseShot)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
