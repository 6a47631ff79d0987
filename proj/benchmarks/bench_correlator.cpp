#include "qdcascade/correlator.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace qdcascade;

namespace {

TagStream uniform_stream(std::size_t n, std::uint64_t span, std::uint16_t channel,
                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> when(0, span);
    TagStream tags(n);
    for (auto &t : tags)
        t = {when(rng), channel, 0};
    sort_by_time(tags);
    return tags;
}

void BM_Correlate(benchmark::State &state) {
    auto const n = static_cast<std::size_t>(state.range(0));
    // ~1 tag per 12.5 ns period on each stream, like a bright cascade line.
    auto const span = static_cast<std::uint64_t>(n) * 12'500;
    auto const a = uniform_stream(n, span, 0, 1);
    auto const b = uniform_stream(n, span, 1, 2);
    CorrelationRequest const req{4, static_cast<Picoseconds>(state.range(1)), 0, 1};
    for (auto _ : state) {
        auto h = correlate(a, b, req);
        benchmark::DoNotOptimize(h.total_pairs);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n));
}

void BM_IntegratePeaks(benchmark::State &state) {
    auto h = make_histogram({4, 75'000, 0, 1});
    std::mt19937_64 rng(3);
    for (auto &c : h.counts)
        c = rng() % 100;
    h.recount();
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate_peaks(h, 12'500));
}

} // namespace

BENCHMARK(BM_Correlate)->Args({1 << 16, 75'000})->Args({1 << 20, 75'000})->Args({1 << 20, 4'000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntegratePeaks);
