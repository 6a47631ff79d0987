#include "qdcascade/emitter.hpp"

#include <benchmark/benchmark.h>

using namespace qdcascade;

namespace {

void BM_EmitCascade(benchmark::State &state) {
    EmitterModel const em{.tau_xx = 161, .tau_x = 619};
    auto const n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(emit_cascade(em, {}, n, 1).x.photons.size());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateCascade(benchmark::State &state) {
    EmitterModel const em{.tau_xx = 161, .tau_x = 619, .background_rate = 100};
    CascadeDetectors dets;
    dets.xx = dets.x = {.jitter_fwhm = 15, .efficiency = 0.85};
    auto const n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_cascade(em, {}, dets, n, 1).x.size());
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_EmitCascade)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateCascade)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
