#include "cvtomo/analysis.hpp"
#include "cvtomo/experiment.hpp"
#include "cvtomo/fock.hpp"
#include "cvtomo/quadrature.hpp"
#include "cvtomo/synth.hpp"
#include "cvtomo/temporal_mode.hpp"
#include "cvtomo/tomography.hpp"
#include "cvtomo/wigner.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

// Microbenchmarks for the pipeline's hot paths. Sizes default to the
// experiment's operating point (Fock dimension 20, 201-point Wigner grids,
// 5 µs traces at 1 GS/s) so the numbers map directly onto end-to-end cost.

namespace {

using namespace cvtomo;

void BM_SqueezedVacuum(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(squeezed_vacuum(-5.39, dim));
    }
}
BENCHMARK(BM_SqueezedVacuum)->Arg(20)->Arg(30);

void BM_ApplyLoss(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const DensityMatrix rho = squeezed_vacuum(-5.39, dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_loss(rho, 0.69));
    }
}
BENCHMARK(BM_ApplyLoss)->Arg(20)->Arg(30);

void BM_HeraldedState(benchmark::State& state) {
    const ExperimentParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(heralded_state(params, true));
    }
}
BENCHMARK(BM_HeraldedState)->Unit(benchmark::kMicrosecond);

void BM_WignerPoint(benchmark::State& state) {
    const DensityMatrix rho = heralded_state(ExperimentParams{}, true);
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(wigner_point(rho, x, 0.3));
        x = std::fmod(x + 0.01, 2.0);  // avoid a constant-folded argument
    }
}
BENCHMARK(BM_WignerPoint);

void BM_WignerGrid(benchmark::State& state) {
    const DensityMatrix rho = heralded_state(ExperimentParams{}, true);
    const int points = static_cast<int>(state.range(0));
    const std::vector<double> axis = uniform_grid(5.0, points);
    for (auto _ : state) {
        benchmark::DoNotOptimize(wigner_grid(rho, axis, axis));
    }
    state.SetItemsProcessed(state.iterations() * points * points);
}
BENCHMARK(BM_WignerGrid)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_QuadraturePdf(benchmark::State& state) {
    const DensityMatrix rho = heralded_state(ExperimentParams{}, true);
    const std::vector<double> grid = uniform_grid(9.0, 2001);
    for (auto _ : state) {
        benchmark::DoNotOptimize(predicted_quadrature_pdf(rho, 0.4, grid));
    }
    state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_QuadraturePdf)->Unit(benchmark::kMicrosecond);

void BM_PovmBuild(benchmark::State& state) {
    std::vector<double> grid;
    for (int i = 0; i < 120; ++i) grid.push_back(-5.95 + 0.1 * i);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_povm(0.7, grid, 0.72, 20));
    }
    state.SetItemsProcessed(state.iterations() * grid.size());
}
BENCHMARK(BM_PovmBuild)->Unit(benchmark::kMillisecond);

void BM_MaxlikIterations(benchmark::State& state) {
    const DensityMatrix rho = heralded_state(ExperimentParams{}, true);
    const auto records = sample_records(rho, 50000, 17, 60);
    const BinnedRecords binned = bin_records(records, 60, 6.0, 0.1);
    const int iterations = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(maxlik_reconstruct_binned(binned, 20, iterations, 1.0));
    }
    state.SetItemsProcessed(state.iterations() * iterations);
}
BENCHMARK(BM_MaxlikIterations)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_SampleRecords(benchmark::State& state) {
    const DensityMatrix rho = heralded_state(ExperimentParams{}, true);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_records(rho, 10000, 17, 60));
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_SampleRecords)->Unit(benchmark::kMillisecond);

void BM_SynthesizeRun(benchmark::State& state) {
    ExperimentParams params;
    params.trace_duration_s = 1e-6;
    const int n_traces = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(synthesize_run(params, n_traces, 41, 10));
    }
    state.SetItemsProcessed(state.iterations() * n_traces);
}
BENCHMARK(BM_SynthesizeRun)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_DecimateTraces(benchmark::State& state) {
    ExperimentParams params;
    const TraceSet set = synthesize_run(params, 100, 42, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decimate_traces(set.traces, 8));
    }
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_DecimateTraces)->Unit(benchmark::kMillisecond);

void BM_ModeRecovery(benchmark::State& state) {
    ExperimentParams params;
    const TraceSet set = synthesize_run(params, 500, 43, 1);
    const DecimatedEnsemble ens = decimate_traces(set.traces, 8);
    const int win_len = 31;
    const int win_begin = ens.herald_block - win_len + 1;
    for (auto _ : state) {
        const Eigen::MatrixXd k = autocorrelation_matrix(ens, win_begin, win_len);
        auto mode = principal_mode(k, ens.dt);
        benchmark::DoNotOptimize(mode);
    }
    state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_ModeRecovery)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
