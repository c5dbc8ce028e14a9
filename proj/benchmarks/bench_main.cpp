#include <benchmark/benchmark.h>

#include <cmath>

#include "parajulia/fixed_points.hpp"
#include "parajulia/harness.hpp"
#include "parajulia/measure.hpp"
#include "parajulia/pressure.hpp"
#include "parajulia/sampler.hpp"
#include "parajulia/spatial_index.hpp"
#include "parajulia/spectra.hpp"

using namespace parajulia;

namespace {

std::vector<double> dyadic(int k0, int k1) {
    std::vector<double> out;
    for (int k = k0; k <= k1; ++k) out.push_back(std::ldexp(1.0, -k));
    return out;
}

const PointCloud& circle_cloud() {
    static const PointCloud c = inverse_orbit_sample(RationalMap::quadratic(0.0), 1, 40, 200000);
    return c;
}

void BM_InverseSample(benchmark::State& state) {
    const auto map = RationalMap::quadratic(-1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(inverse_orbit_sample(map, 1, 40, static_cast<std::size_t>(state.range(0))));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InverseSample)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_IndexBuild(benchmark::State& state) {
    const auto& c = circle_cloud();
    for (auto _ : state) benchmark::DoNotOptimize(SpatialIndex(c.points, {}, std::ldexp(1.0, -14)));
}
BENCHMARK(BM_IndexBuild)->Unit(benchmark::kMillisecond);

void BM_AssouadSpectrum(benchmark::State& state) {
    const SpatialIndex idx(circle_cloud().points, {}, std::ldexp(1.0, -13));
    const auto rl = dyadic(4, 11);
    for (auto _ : state) benchmark::DoNotOptimize(assouad_spectrum(idx, 0.5, rl));
}
BENCHMARK(BM_AssouadSpectrum)->Unit(benchmark::kMillisecond);

void BM_SequenceCalibration(benchmark::State& state) {
    const auto seq = calibration_set(parse_calibration("sequence:1"), 100000);
    const SpatialIndex idx(seq.points, {}, std::ldexp(1.0, -26));
    const auto rl = dyadic(12, 24);
    for (auto _ : state) benchmark::DoNotOptimize(assouad_spectrum(idx, 0.25, rl));
}
BENCHMARK(BM_SequenceCalibration)->Unit(benchmark::kMillisecond);

void BM_PressureSolve(benchmark::State& state) {
    const auto map = RationalMap::quadratic(0.25);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_h(map, n));
}
BENCHMARK(BM_PressureSolve)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_HyperbolicZoom(benchmark::State& state) {
    const auto map = RationalMap::quadratic(0.25);
    const auto pps = parabolic_points_iterated(map);
    const auto pts = inverse_orbit_sample(map, 3, 40, 64).points;
    std::size_t i = 0;
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(hyperbolic_zoom(map, pps, pts[i++ % pts.size()], 4000));
        } catch (const Error&) {
        }
    }
}
BENCHMARK(BM_HyperbolicZoom)->Unit(benchmark::kMicrosecond);

void BM_MeasureBall(benchmark::State& state) {
    const double radii[] = {1.0, 1e-3, 1e-7, 1e-12};
    const int petals[] = {1, 0, 1, 1};
    const auto zoom = synthetic_zoom(radii, petals, true);
    double r = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(log_measure_ball(zoom, r, 1.2));
        r = r < 1e-20 ? 0.5 : r * 0.9;
    }
}
BENCHMARK(BM_MeasureBall);

void BM_RotationDensity(benchmark::State& state) {
    const double alpha = std::sqrt(2.0) - 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(rotation_density(alpha, 1e-3));
}
BENCHMARK(BM_RotationDensity)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
