#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "cellpol/heuristic.hpp"
#include "cellpol/linalg.hpp"
#include "cellpol/scheme1d.hpp"
#include "cellpol/scheme2d.hpp"

using namespace cellpol;

namespace {

std::vector<double> wave(std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.3 * std::sin(0.37 * static_cast<double>(i));
    return v;
}

void BM_TridiagonalPeriodic(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const double dx = 1.0 / static_cast<double>(n);
    const TridiagonalSolver solver(assemble_heat_periodic(n, dx, 1e-3));
    const auto b = wave(n);
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TridiagonalPeriodic)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

void BM_HalfLineStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid1D g = Grid1D::half_line(n, 10.0);
    HalfLineStepper stepper(g, Params{});
    auto rho = exponential_profile(g, 1.0);
    const double dt = 0.5 / stepper.simplified_rate(rho);
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step_simplified(rho, dt));
}
BENCHMARK(BM_HalfLineStep)->Arg(400)->Arg(800);

void BM_SeparableScreened(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid2D g = build_grid_2d(1.0, n, n);
    const SeparableSolver2D solver = SeparableSolver2D::screened(g, 0.1);
    const auto b = wave(g.cells());
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(b));
}
BENCHMARK(BM_SeparableScreened)->Arg(32)->Arg(64)->Arg(128);

void BM_CoupledStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Grid2D g = build_grid_2d(1.0, n, n);
    Params p;
    p.M = 20.0;
    CoupledStepper stepper(g, p);
    const SimState s = seeded_random_initial(g, p, 0.1, 7);
    for (auto _ : state) benchmark::DoNotOptimize(stepper.step(s, 1e-3));
}
BENCHMARK(BM_CoupledStep)->Arg(32)->Arg(64)->Arg(128);

void BM_Hilbert(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto f = wave(n);
    const double dy = 2.0 * kPi / static_cast<double>(n);
    for (auto _ : state) benchmark::DoNotOptimize(hilbert_periodic(f, dy));
}
BENCHMARK(BM_Hilbert)->Arg(128)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
