#include "qdcascade/tag_file.hpp"

#include <benchmark/benchmark.h>

#include <cstring>
#include <filesystem>

using namespace qdcascade;

namespace {

TagStream ramp(std::size_t n) {
    TagStream tags(n);
    for (std::size_t i = 0; i < n; ++i)
        tags[i] = {1000 + 12'500 * i, static_cast<std::uint16_t>(i % 3), 0};
    return tags;
}

void BM_Encode(benchmark::State &state) {
    auto const tags = ramp(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(encode_tags(tags).size());
    state.SetBytesProcessed(state.iterations() * state.range(0) * 16);
}

void BM_Decode(benchmark::State &state) {
    auto const s = encode_tags(ramp(static_cast<std::size_t>(state.range(0))));
    std::vector<std::byte> bytes(s.size());
    std::memcpy(bytes.data(), s.data(), s.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(decode_tags(bytes).size());
    state.SetBytesProcessed(state.iterations() * state.range(0) * 16);
}

void BM_FileRoundTrip(benchmark::State &state) {
    auto const tags = ramp(static_cast<std::size_t>(state.range(0)));
    auto const path = std::filesystem::temp_directory_path() / "qdcascade_bench.ctag";
    for (auto _ : state) {
        write_tags(tags, path);
        benchmark::DoNotOptimize(read_tags(path).size());
    }
    std::filesystem::remove(path);
    state.SetBytesProcessed(state.iterations() * state.range(0) * 32);
}

} // namespace

BENCHMARK(BM_Encode)->Arg(1 << 20);
BENCHMARK(BM_Decode)->Arg(1 << 20);
BENCHMARK(BM_FileRoundTrip)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
