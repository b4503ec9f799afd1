// Path fitting on the wave design and prox throughput.

#include <coopreg/penalty.hpp>
#include <coopreg/simulate.hpp>
#include <coopreg/solver.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>

using namespace coopreg;

namespace {

const Family kFamilies[] = {Family::lasso, Family::group, Family::sgl, Family::coop};

void BM_WavePath(benchmark::State& state)
{
    WaveScenario sc;
    sc.n = static_cast<Index>(state.range(1));
    sc.seed = 7;
    const SimulatedData sim = generate(sc);
    const Dataset d = prepare(sim.X, sim.y);
    const PenaltySpec spec(kFamilies[state.range(0)], sim.partition, 0.5);
    const auto grid = lambda_grid(lambda_max(d, spec), 100, default_lambda_min_ratio(d.n(), d.p()));
    for (auto _ : state) {
        PathResult pr = path(d, spec, grid);
        benchmark::DoNotOptimize(pr);
    }
    state.SetLabel(std::string(to_string(spec.family)));
}
BENCHMARK(BM_WavePath)->ArgsProduct({{0, 1, 2, 3}, {45, 180}})->Unit(benchmark::kMillisecond);

void BM_CoopProx(benchmark::State& state)
{
    const Index p = state.range(0);
    const PenaltySpec spec(Family::coop, GroupPartition::contiguous(std::vector<Index>(static_cast<std::size_t>(p / 9), 9)));
    Vector u(p);
    for (Index j = 0; j < p; ++j) u[j] = std::sin(0.37 * static_cast<double>(j)) * 2.0;
    for (auto _ : state) {
        Vector v = prox(u, 0.5, spec);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_CoopProx)->Arg(90)->Arg(900);

} // namespace

BENCHMARK_MAIN();
