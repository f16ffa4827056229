#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "spmb/energy.hpp"
#include "spmb/geometry.hpp"
#include "spmb/groundstate.hpp"
#include "spmb/interactions.hpp"
#include "spmb/potentials.hpp"

namespace {

std::shared_ptr<const spmb::GroundStateProfile> profile() {
  static auto prof = std::make_shared<const spmb::GroundStateProfile>(
      spmb::find_ground_state(3.0, 1e-10));
  return prof;
}

spmb::PotentialModel capped() {
  return spmb::PotentialModel{1.0, 2.0, spmb::PotentialVariant::CappedPower,
                              1.0};
}

}  // namespace

static void BM_InverseDistanceSum(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(spmb::inverse_distance_sum(k, 1.0).exact);
}
BENCHMARK(BM_InverseDistanceSum)->Arg(1000)->Arg(100000)->Arg(1000000);

static void BM_GroundStateSolve(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(spmb::find_ground_state(3.0, 1e-10).center_value);
}
BENCHMARK(BM_GroundStateSolve)->Unit(benchmark::kMillisecond);

static void BM_InteractionIntegral(benchmark::State& state) {
  auto prof = profile();
  const double d = static_cast<double>(state.range(0));
  for (auto _ : state) {
    spmb::QuadratureBudget budget(0);
    benchmark::DoNotOptimize(spmb::interaction_ep(*prof, d, 1e-8, budget));
  }
}
BENCHMARK(BM_InteractionIntegral)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_NewtonPotentialEval(benchmark::State& state) {
  auto prof = profile();
  const spmb::NewtonPotential phi(spmb::density_V_u_sq(*prof, capped()));
  double r = 0.0;
  for (auto _ : state) {
    r += 0.37;
    if (r > 60.0) r = 0.0;
    benchmark::DoNotOptimize(phi(r));
  }
}
BENCHMARK(BM_NewtonPotentialEval);

static void BM_EnergyDirect(benchmark::State& state) {
  auto prof = profile();
  const int k = static_cast<int>(state.range(0));
  const double r = (2.0 / M_PI) * k * std::log(static_cast<double>(k));
  spmb::QuadratureBudget budget(0);
  const auto constants = spmb::reduced_constants(*prof, 1e-7, budget);
  auto ansatz = spmb::make_ansatz(k, r, prof, capped());
  for (auto _ : state) {
    spmb::QuadratureBudget b(0);
    benchmark::DoNotOptimize(
        spmb::energy_direct(ansatz, constants, nullptr, spmb::QuadratureSpec{},
                            b)
            .total);
  }
}
BENCHMARK(BM_EnergyDirect)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_ResidualSurrogate(benchmark::State& state) {
  auto prof = profile();
  const int k = static_cast<int>(state.range(0));
  const double r = (2.0 / M_PI) * k * std::log(static_cast<double>(k));
  auto ansatz = spmb::make_ansatz(k, r, prof, capped());
  auto probes = spmb::default_probes(prof);
  for (auto _ : state) {
    spmb::QuadratureBudget b(0);
    benchmark::DoNotOptimize(
        spmb::residual_surrogate(ansatz, probes, spmb::QuadratureSpec{}, b));
  }
}
BENCHMARK(BM_ResidualSurrogate)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
