#include "eadkit/calibrate.hpp"
#include "eadkit/geometry.hpp"
#include "eadkit/optimize.hpp"
#include "eadkit/stack.hpp"

#include <benchmark/benchmark.h>

using namespace eadkit;

namespace {

CalibrationParams reference() {
    CalibrationParams c;
    c.corona = {3.4554e-11, 2200.0, 0.8225};
    c.degradation.factor = 0.85;
    c.conductance_reference_area = 172.27433388230814e-6;
    return c;
}

void BM_LayoutEmitters(benchmark::State& state) {
    StageParams p;
    p.aspect_ratio = static_cast<double>(state.range(0));
    const StageGeometry stage = make_stage(p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(layout_emitters(stage));
    }
}
BENCHMARK(BM_LayoutEmitters)->DenseRange(1, 9, 4);

void BM_StackPerformance(benchmark::State& state) {
    StageParams p;
    p.aspect_ratio = 5;
    ThrusterDesign d;
    d.stage = make_stage(p);
    d.stage_count = 5;
    d.corona = reference().corona;
    const PreparedDesign prepared = prepare_design(d, default_onset_coeffs());
    const FluidMedium air;
    double v = 2600.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(stack_performance(prepared, v, {0.85}, air));
        v = v < 3300.0 ? v + 1.0 : 2600.0;
    }
}
BENCHMARK(BM_StackPerformance);

void BM_OptimizeReferenceSpace(benchmark::State& state) {
    DesignSpace s;
    s.aspect_ratios = {1, 2, 3, 4, 5};
    s.stage_counts = {1, 2, 3, 4, 5};
    s.tip_counts = {4};
    s.interstage_factors = {1.5, 2.0};
    Objective o;
    o.constraints.push_back({Metric::max_voltage, 3300.0});
    const CalibrationParams calib = reference();
    const OptimizeOptions options{1.0, static_cast<unsigned>(state.range(0))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize(s, o, calib, FluidMedium{}, options));
    }
}
BENCHMARK(BM_OptimizeReferenceSpace)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_FitIv(benchmark::State& state) {
    SynthOptions o;
    for (double v = 2450.0; v <= 3300.0; v += 850.0 / static_cast<double>(state.range(0))) {
        o.voltages.push_back(v);
    }
    o.relative_noise = 0.02;
    o.seed = 7;
    const MeasuredCurve curve = synthesize_curve({3.4554e-11, 2386.23, 0.8225}, FluidMedium{}, o);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_iv(curve));
    }
}
BENCHMARK(BM_FitIv)->Arg(16)->Arg(256);

}  // namespace
BENCHMARK_MAIN();
