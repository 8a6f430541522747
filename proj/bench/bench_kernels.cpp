// Serial reference path against the OpenMP kernels on the same inputs.
#include <benchmark/benchmark.h>

#include "hermma/geometry.hpp"
#include "hermma/kernels.hpp"
#include "hermma/ma_ops.hpp"
#include "hermma/testfields.hpp"

using namespace hermma;

namespace {

struct Fixture {
    ProblemSpec spec;
    ScalarField u, dir;

    explicit Fixture(int m)
    {
        auto grid = TorusGrid::make(3, {0, 3, 4}, m);
        testfields::Rng rng(42);
        spec.omega = testfields::random_metric(grid, rng, 0.08, 2);
        spec.omega0 = testfields::random_metric(grid, rng, 0.08, 2);
        spec.F = testfields::random_smooth(grid, rng, 0.1, 3, 2);
        u = testfields::random_smooth(grid, rng, 0.005, 3, 2);
        dir = testfields::random_smooth(grid, rng, 1.0, 3, 2);
    }
};

const Fixture& fixture(int m)
{
    static const Fixture f16(16), f32(32);
    return m == 16 ? f16 : f32;
}

kernels::Exec exec_of(const benchmark::State& state)
{
    return state.range(1) == 0 ? kernels::Exec::serial : kernels::Exec::parallel;
}

void BM_residual(benchmark::State& state)
{
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    kernels::set_default_exec(exec_of(state));
    const MongeAmpere ma(f.spec);
    const SolveState s{f.u, 0.0, 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(ma.residual(s));
}

void BM_linearized_apply(benchmark::State& state)
{
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    kernels::set_default_exec(exec_of(state));
    const MongeAmpere ma(f.spec);
    for (auto _ : state)
        benchmark::DoNotOptimize(ma.linearized_apply(f.u, f.dir));
}

void BM_star_power(benchmark::State& state)
{
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    kernels::set_default_exec(exec_of(state));
    for (auto _ : state)
        benchmark::DoNotOptimize(star_power(f.spec.omega, f.spec.omega0));
}

void BM_chern_ricci(benchmark::State& state)
{
    const Fixture& f = fixture(static_cast<int>(state.range(0)));
    kernels::set_default_exec(exec_of(state));
    for (auto _ : state)
        benchmark::DoNotOptimize(chern_ricci(f.spec.omega));
}

// args: points per active axis, 0 = serial / 1 = parallel
#define HERMMA_BENCH(fn) BENCHMARK(fn)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond)
HERMMA_BENCH(BM_residual);
HERMMA_BENCH(BM_linearized_apply);
HERMMA_BENCH(BM_star_power);
HERMMA_BENCH(BM_chern_ricci);

}  // namespace

BENCHMARK_MAIN();
