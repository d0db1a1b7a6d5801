// Serial versus OpenMP-parallel timings for the two hot paths: the
// secular scan and the heat-trace statistic fold.

#include <benchmark/benchmark.h>

#include <memory>

#include "qgraph/eigenfunction.hpp"
#include "qgraph/secular.hpp"
#include "qgraph/stats.hpp"

namespace {

using namespace qgraph;

SecularSystem make_system() {
    static const MetricGraph g = make_star(5, 1.0);
    static const VertexConditionSet conds = VertexConditionSet::delta_prime(6, 1.0);
    static const Potential q = Potential::constant(g, 0.4);
    return SecularSystem(g, conds, q);
}

void bm_scan_serial(benchmark::State& state) {
    const SecularSystem sys = make_system();
    SecularOptions opts;
    opts.certify = false;
    for (auto _ : state) {
        Spectrum sp = find_spectrum_serial(sys, 0.0, 900.0, opts);
        benchmark::DoNotOptimize(sp.values.data());
    }
}

void bm_scan_parallel(benchmark::State& state) {
    const SecularSystem sys = make_system();
    SecularOptions opts;
    opts.certify = false;
    opts.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Spectrum sp = find_spectrum(sys, 0.0, 900.0, opts);
        benchmark::DoNotOptimize(sp.values.data());
    }
}

void bm_heat_fold(benchmark::State& state) {
    auto sys = std::make_shared<SecularSystem>(make_system());
    SecularOptions opts;
    opts.jobs = static_cast<int>(state.range(0));
    Spectrum sp = find_spectrum_first_n(*sys, 120, opts);
    std::vector<Eigenfunction> efs = build_eigenfunctions(sys, sp);
    const std::vector<double> times = {0.2, 0.1, 0.05};
    for (auto _ : state) {
        HeatTraceResult hr = heat_trace_vertex(sp, efs, 0, times, opts.jobs);
        benchmark::DoNotOptimize(hr.worst_rel_dev);
    }
}

}  // namespace

BENCHMARK(bm_scan_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_scan_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_heat_fold)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
