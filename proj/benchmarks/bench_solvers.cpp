#include "zngauge/dmrg_engine.hpp"
#include "zngauge/ed_engine.hpp"
#include "zngauge/gauge_basis.hpp"
#include "zngauge/hamiltonian.hpp"
#include "zngauge/observables.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace zngauge;

namespace {

ModelParams z3_params(int L, double m) {
    ModelParams p;
    p.n        = 3;
    p.t        = 2.0 * std::numbers::pi / 3.0;
    p.m        = m;
    p.geometry = ChainGeometry{L};
    p.k0       = zero_charge_sector_candidates(3, 0.0).front();
    return p;
}

void BM_BuildBasis(benchmark::State &state) {
    const int L = static_cast<int>(state.range(0));
    for(auto _ : state) benchmark::DoNotOptimize(build_basis(ChainGeometry{L}, 3, 1, true));
    state.counters["dim"] = static_cast<double>(build_basis(ChainGeometry{L}, 3, 1, true).size());
}
BENCHMARK(BM_BuildBasis)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_BuildHamiltonian(benchmark::State &state) {
    const auto p     = z3_params(static_cast<int>(state.range(0)), -1.948);
    const auto basis = build_basis(p.geometry, p.n, p.k0, true);
    for(auto _ : state) benchmark::DoNotOptimize(build_sparse(p, basis));
    state.counters["nnz"] = static_cast<double>(build_sparse(p, basis).nonzeros());
}
BENCHMARK(BM_BuildHamiltonian)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_EdLowestThree(benchmark::State &state) {
    const auto p     = z3_params(static_cast<int>(state.range(0)), -1.948);
    const auto basis = build_basis(p.geometry, p.n, p.k0, true);
    const auto H     = build_sparse(p, basis);
    for(auto _ : state) benchmark::DoNotOptimize(lowest_eigenpairs(H, 3));
}
BENCHMARK(BM_EdLowestThree)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DmrgGroundState(benchmark::State &state) {
    const auto p = z3_params(static_cast<int>(state.range(0)), -1.948);
    SweepPolicy policy;
    policy.chi = static_cast<int>(state.range(1));
    for(auto _ : state) benchmark::DoNotOptimize(ground_state(p, policy));
}
BENCHMARK(BM_DmrgGroundState)->Args({12, 64})->Args({16, 128})->Args({20, 256})->Unit(benchmark::kMillisecond);

void BM_MpsMeasurement(benchmark::State &state) {
    const auto p = z3_params(static_cast<int>(state.range(0)), -1.948);
    const auto g = ground_state(p, SweepPolicy{});
    for(auto _ : state) benchmark::DoNotOptimize(measure_mps(g.states[0], p));
}
BENCHMARK(BM_MpsMeasurement)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
