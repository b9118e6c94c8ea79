#include "toda/factorization.hpp"
#include "toda/pde.hpp"
#include "toda/realforms.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace toda;

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(1) ? "parallel" : "serial"); }

void BM_IntegrateFrame(benchmark::State& s) {
    const int n = static_cast<int>(s.range(0));
    const GeometrySpec geom = make_geometry(Tag::AffIndef);
    const Grid g = make_grid(0.0, 0.0, 1.0, 1.0, n, n);
    const ScalarField omega(g, 0.0);
    FrameOptions o;
    o.exec = exec_of(s);
    for (auto _ : s)
        benchmark::DoNotOptimize(
            integrate_frame(geom, omega, constant_sampler(1.0), constant_sampler(1.0), 1.0, Mat3::Identity(), o));
    label(s);
}

void BM_SolveHyperbolic(benchmark::State& s) {
    const int n = static_cast<int>(s.range(0));
    const GeometrySpec geom = make_geometry(Tag::AffIndef);
    const Grid g = make_grid(0.0, 0.0, 0.5, 0.5, n, n);
    GoursatData d;
    for (int i = 0; i < n; ++i) d.u_axis.push_back(0.2 * std::sin(g.a(i)));
    for (int j = 0; j < n; ++j) d.v_axis.push_back(0.1 * g.b(j) * g.b(j));
    for (auto _ : s)
        benchmark::DoNotOptimize(solve_hyperbolic(geom, constant_sampler(0.5), constant_sampler(0.5), d, g, nullptr,
                                                  HyperbolicOptions{}, exec_of(s)));
    label(s);
}

void BM_DpwConformal(benchmark::State& s) {
    const int n = static_cast<int>(s.range(0));
    const GeometrySpec geom = make_geometry(Tag::CH2);
    const Grid g = make_grid(0.0, 0.0, 0.5, 0.5, n, n);
    PointData p;
    const Mat3 E = graded_alpha(geom, p).Um1;
    Potential eta;
    eta.coeffs[-1] = [E](cd) { return E; };
    DpwOptions o;
    o.exec = exec_of(s);
    for (auto _ : s) benchmark::DoNotOptimize(dpw_conformal(geom, eta, g, o));
    label(s);
}

void BM_ClassifySearch(benchmark::State& s) {
    SearchConfig cfg;
    cfg.exec = exec_of(s);
    for (auto _ : s) benchmark::DoNotOptimize(classify_involutions(Family::Conjugation, Relation::Commuting, cfg));
    label(s);
}

}  // namespace

BENCHMARK(BM_IntegrateFrame)->ArgsProduct({{65, 129}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveHyperbolic)->ArgsProduct({{129, 257}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DpwConformal)->ArgsProduct({{9, 17}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifySearch)->ArgsProduct({{0}, {0, 1}})->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
