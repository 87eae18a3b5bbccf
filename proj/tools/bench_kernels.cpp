// Microbenchmarks comparing the OpenMP-parallel kernels against their serial
// reference implementations, plus the hot library paths built on them.
//
// Run: build/bench_kernels [--benchmark_filter=...]

#include <complex>
#include <cstdint>

#include <benchmark/benchmark.h>

#include "aim/geometry.hpp"
#include "aim/imaging.hpp"
#include "aim/kernels.hpp"
#include "aim/metrics.hpp"
#include "aim/rng.hpp"
#include "aim/signalsim.hpp"

namespace {

aim::CRaster random_raster(std::size_t n, std::uint64_t seed) {
    aim::CRaster a(n, n);
    aim::Rng rng(seed);
    for (std::size_t i = 0; i < a.size(); ++i)
        a.data()[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return a;
}

void bm_fft2d(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto base = random_raster(n, 42);
    for (auto _ : state) {
        auto a = base;
        aim::kernels::fft2d_inplace(a, -1);
        benchmark::DoNotOptimize(a.data());
    }
}
BENCHMARK(bm_fft2d)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

void bm_dft2d_reference(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto base = random_raster(n, 42);
    for (auto _ : state) {
        auto out = aim::kernels::dft2d_reference(base, -1);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_dft2d_reference)->Arg(16)->Arg(32)->Arg(64);

void bm_convolve_fft(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_raster(n, 1);
    const auto b = random_raster(n, 2);
    for (auto _ : state) {
        auto c = aim::kernels::convolve2d_circular(a, b);
        benchmark::DoNotOptimize(c.data());
    }
}
BENCHMARK(bm_convolve_fft)->Arg(64)->Arg(128)->Arg(256);

void bm_convolve_reference(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_raster(n, 1);
    const auto b = random_raster(n, 2);
    for (auto _ : state) {
        auto c = aim::kernels::convolve2d_reference(a, b);
        benchmark::DoNotOptimize(c.data());
    }
}
BENCHMARK(bm_convolve_reference)->Arg(16)->Arg(32)->Arg(64);

aim::geometry::PositionGrid bench_grid() {
    aim::geometry::PositionGrid grid;
    grid.name = "bench";
    int id = 1;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 4; ++c)
            grid.slots.push_back({id++, 30.0 * c, 30.0 * r});
    return grid;
}

void bm_simulate_visibility(benchmark::State& state) {
    const auto grid = bench_grid();
    aim::geometry::ArrayLayout layout;
    layout.grid_name = grid.name;
    for (int i = 1; i <= 24; ++i) layout.indices.push_back(i);
    aim::signalsim::EmitterScene scene;
    scene.points = {{0.0, 0.0, 1.0}, {0.1, -0.05, 0.5}, {-0.2, 0.15, 0.25}};
    const auto channel = aim::signalsim::ChannelModel::unit(24);
    const auto snapshots = static_cast<long>(state.range(0));
    for (auto _ : state) {
        auto est = aim::signalsim::simulate_visibility(scene, layout, grid, 7.9, channel,
                                                       snapshots, 7);
        benchmark::DoNotOptimize(est.upper.data());
    }
    state.SetItemsProcessed(state.iterations() * snapshots);
}
BENCHMARK(bm_simulate_visibility)->Arg(1024)->Arg(8192)->Arg(65536);

void bm_ssim(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    aim::Raster<double> a(n, n), b(n, n);
    aim::Rng rng(3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a.data()[i] = rng.uniform01();
        b.data()[i] = rng.uniform01();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(aim::metrics::ssim(a, b));
    }
}
BENCHMARK(bm_ssim)->Arg(128)->Arg(256);

} // namespace

BENCHMARK_MAIN();
