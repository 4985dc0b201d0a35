#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "gammalab/convexify.hpp"
#include "gammalab/densities.hpp"
#include "gammalab/energy.hpp"
#include "gammalab/kernel.hpp"
#include "gammalab/minimize.hpp"
#include "gammalab/quadrature.hpp"

using namespace gammalab;

namespace {

NonlocalDensity uniform(int d, double p = 2.0) {
    return builtin_nonlocal("kernel-p-difference", {{"dimension", double(d)}, {"p", p}});
}

std::vector<double> smooth_field(const Grid& grid) {
    std::vector<double> u(grid.node_count());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Vec x = grid.position(i);
        u[i] = std::sin(3.0 * x[0]) + 0.5 * std::cos(5.0 * x[1]) + x[0] * x[1];
    }
    return u;
}

// Energy and gradient on a 1D grid with 64 cells per kernel radius.
void BM_EnergyGradient1D(benchmark::State& state) {
    const double k = static_cast<double>(state.range(0));
    const Grid grid(1, static_cast<std::size_t>(64 * k) + 1);
    const DiscreteEnergy energy(grid, uniform(1), builtin_local("double-well-1d"), {k, std::nullopt});
    const std::vector<double> u = smooth_field(grid);
    std::vector<double> g(u.size());
    for (auto _ : state) benchmark::DoNotOptimize(energy.energy_and_gradient(u, g));
    state.counters["pairs"] = static_cast<double>(energy.pair_count());
}
BENCHMARK(BM_EnergyGradient1D)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_EnergyGradient2D(benchmark::State& state) {
    const Grid grid(2, static_cast<std::size_t>(state.range(0)));
    const DiscreteEnergy energy(grid, uniform(2), builtin_local("quadratic-local"), {4.0, std::nullopt});
    const std::vector<double> u = smooth_field(grid);
    std::vector<double> g(u.size());
    for (auto _ : state) benchmark::DoNotOptimize(energy.energy_and_gradient(u, g));
    state.counters["pairs"] = static_cast<double>(energy.pair_count());
}
BENCHMARK(BM_EnergyGradient2D)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

// Per-pair callback path, taken by densities without the kernel-power form.
void BM_EnergyGeneric1D(benchmark::State& state) {
    NonlocalDensity f = uniform(1);
    f.kernel_power.reset();
    const Grid grid(1, 257);
    const DiscreteEnergy energy(grid, f, std::nullopt, {4.0, std::nullopt});
    const std::vector<double> u = smooth_field(grid);
    std::vector<double> g(u.size());
    for (auto _ : state) benchmark::DoNotOptimize(energy.energy_and_gradient(u, g));
}
BENCHMARK(BM_EnergyGeneric1D)->Unit(benchmark::kMicrosecond);

void BM_F0(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const KernelSpec k = KernelSpec::builtin("triangle", d);
    const Vec xi{0.6, d == 2 ? -0.8 : 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(f0_of_xi(k, 2.5, xi));
}
BENCHMARK(BM_F0)->Arg(1)->Arg(2);

void BM_ConvexEnvelope1D(benchmark::State& state) {
    const auto f = SampledFunction1D::sample(
        [](double x) { return std::min((x - 1) * (x - 1), (x + 1) * (x + 1)) + 0.1 * x * x; }, -4.0, 4.0,
        static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(convex_envelope(f));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvexEnvelope1D)->RangeMultiplier(8)->Range(256, 131072)->Complexity(benchmark::oN);

void BM_ConvexEnvelope2D(benchmark::State& state) {
    const auto f = SampledFunction2D::sample(
        [](const Vec& x) {
            const double r = norm(x);
            return (r - 1.0) * (r - 1.0) + 0.1 * r * r;
        },
        -2.0, 2.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(convex_envelope_2d(f));
}
BENCHMARK(BM_ConvexEnvelope2D)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_MinimizeQuadratic1D(benchmark::State& state) {
    const DiscreteEnergy energy(Grid(1, 257), uniform(1), builtin_local("quadratic-local"), {4.0, std::nullopt});
    const Problem problem{energy, boundary_layer_mask(energy.grid(), AffineFunction{{1.0, 0.0}, 0.0}, 0.0)};
    for (auto _ : state) benchmark::DoNotOptimize(minimize(problem, MinimizeOptions{}));
}
BENCHMARK(BM_MinimizeQuadratic1D)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
