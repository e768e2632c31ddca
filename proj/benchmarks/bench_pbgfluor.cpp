// Hot paths: memory table, one-time and two-time evolution, finite-T projection, band density.

#include <benchmark/benchmark.h>

#include "pbgfluor/algebra.hpp"
#include "pbgfluor/dynamics.hpp"
#include "pbgfluor/environment.hpp"
#include "pbgfluor/oracle.hpp"
#include "pbgfluor/spectrum.hpp"

using namespace pbgfluor;

namespace {

const auto atom = algebra::dressed_parameters(0.3, 0.0, 1.2);
const auto band = environment::CorrelationKernel::periodic_band_3d(0.05, 1.0, 1.0).with_frame_shift(1.2);

} // namespace

static void MemoryTable(benchmark::State& st) {
    const TimeGrid grid(1000.0, static_cast<std::size_t>(st.range(0)));
    const double phases[3] = {0.0, 0.6, -0.6};
    for (auto _ : st) benchmark::DoNotOptimize(environment::build_memory_table(band, phases, grid));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(MemoryTable)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void OneTime(benchmark::State& st) {
    const auto model = dynamics::TwoLevelModel::driven(atom);
    const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, band,
                                              TimeGrid(1000.0, static_cast<std::size_t>(st.range(0))));
    for (auto _ : st) benchmark::DoNotOptimize(solver.evolve_one_time(model.initial_state));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(OneTime)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void TwoTimeRow(benchmark::State& st) {
    const auto model = dynamics::TwoLevelModel::driven(atom);
    const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, band,
                                              TimeGrid(400.0, static_cast<std::size_t>(st.range(0))));
    const auto traj = solver.evolve_one_time(model.initial_state);
    for (auto _ : st) benchmark::DoNotOptimize(solver.correlation_row(traj, 0, model.coupling.adjoint(), model.coupling));
}
BENCHMARK(TwoTimeRow)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

static void FiniteTSpectrum(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const TimeGrid grid(100.0, n);
    const auto model = dynamics::TwoLevelModel::driven(atom);
    const dynamics::WeakCouplingSolver solver(model.coupling, model.hamiltonian, band, grid);
    const auto field = dynamics::correlation_field(solver, solver.evolve_one_time(model.initial_state), 1);
    const auto w = spectrum::uniform_grid(0.0, 2.4, 201);
    for (auto _ : st) benchmark::DoNotOptimize(spectrum::spectrum_finite_T(field, band, grid, w));
}
BENCHMARK(FiniteTSpectrum)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BandDensity(benchmark::State& st) {
    double w = 0.1;
    for (auto _ : st) {
        benchmark::DoNotOptimize(environment::band_density_3d(w, 0.05, 1.0, 1.0));
        w = w > 1.9 ? 0.1 : w + 0.0137;
    }
}
BENCHMARK(BandDensity)->Unit(benchmark::kMicrosecond);

static void OracleRk4(benchmark::State& st) {
    const auto k = environment::CorrelationKernel::periodic_band_3d(0.05, 1.0, 1.0);
    const auto bath = oracle::discretize_bath([](double w) { return environment::band_density_3d(w, 0.05, 1.0, 1.0); },
                                              0.0, 2.0, static_cast<std::size_t>(st.range(0)), 200.0,
                                              [&](double t) { return k.evaluate(t); });
    const TimeGrid grid(200.0, 2000);
    for (auto _ : st) benchmark::DoNotOptimize(oracle::one_excitation_exact(bath, 1.0, grid));
}
BENCHMARK(OracleRk4)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
