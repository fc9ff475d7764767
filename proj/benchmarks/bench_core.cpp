#include <benchmark/benchmark.h>

#include <vector>

#include "mirrorscan/collection.hpp"
#include "mirrorscan/dipole_emission.hpp"

using namespace mirrorscan;

namespace {

EmitterEnvironment silver_gap(double gap_nm) { return mirror_environment(materials::silver(), gap_nm); }

void BM_StackReflection(benchmark::State& state) {
    const ResolvedStack s(silver_gap(1000.0).upward, 700.0);
    double u = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(s.reflection(Polarization::P, u));
        u = u < 2.0 ? u + 1e-3 : 0.0;
    }
}
BENCHMARK(BM_StackReflection);

void BM_TotalDecay(benchmark::State& state) {
    const auto env = silver_gap(static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(total_decay(env, 700.0));
}
BENCHMARK(BM_TotalDecay)->Arg(20)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_CollectedPower(benchmark::State& state) {
    const auto env = silver_gap(1000.0);
    for (auto _ : state) benchmark::DoNotOptimize(collected_power(env, 700.0, {}));
}
BENCHMARK(BM_CollectedPower)->Unit(benchmark::kMicrosecond);

void BM_MapRow(benchmark::State& state) {
    const std::vector<double> d{5000.0};
    std::vector<double> l;
    for (double x = 540.0; x <= 900.0; x += 1.0) l.push_back(x);
    MapOptions opts;
    opts.workers = 1;
    for (auto _ : state) benchmark::DoNotOptimize(enhancement_map(d, l, {}, silver_gap(500.0), opts));
}
BENCHMARK(BM_MapRow)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
