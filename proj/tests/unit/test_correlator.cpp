#include "support.hpp"

#include "qdcascade/correlator.hpp"
#include "qdcascade/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qdcascade;
using testsupport::brute_force_histogram;

namespace {

TagStream random_stream(std::mt19937_64 &rng, std::size_t n, std::uint64_t span,
                        std::uint16_t channel) {
    std::uniform_int_distribution<std::uint64_t> when(0, span);
    TagStream tags(n);
    for (auto &t : tags)
        t = {when(rng), channel, 0};
    sort_by_time(tags);
    return tags;
}

} // namespace

TEST(Correlator, MatchesBruteForceOnRandomStreams) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> size(0, 10'000);
    std::uniform_int_distribution<int> bw_pick(1, 64);
    std::uniform_int_distribution<int> nbins(0, 400);
    for (int trial = 0; trial < 100; ++trial) {
        // Small cases exercise edges; keep the average pair count moderate.
        std::size_t const na = trial < 20 ? size(rng) % 50 : size(rng);
        std::size_t const nb = trial < 20 ? size(rng) % 50 : size(rng);
        Picoseconds const bw = bw_pick(rng);
        Picoseconds const window = bw * nbins(rng);
        // Sparse and dense regimes; low spans force many ties.
        std::uint64_t const span = trial % 3 == 0 ? 2'000 : 50'000'000;
        auto const a = random_stream(rng, na, span, 0);
        auto const b = random_stream(rng, nb, span, 1);
        CorrelationRequest const req{bw, window, 0, 1};
        auto const hist = correlate(a, b, req);
        auto const expected = brute_force_histogram(a, b, bw, window);
        ASSERT_EQ(hist.counts, expected) << "trial " << trial << " bw " << bw << " window "
                                         << window;
        EXPECT_EQ(hist.bin_width, bw);
        EXPECT_EQ(hist.center_offset, -window);
        std::uint64_t total = 0;
        for (auto c : expected)
            total += c;
        EXPECT_EQ(hist.total_pairs, total);
    }
}

TEST(Correlator, ZeroDelayIsBinCenter) {
    TagStream const a{{1000, 0, 0}};
    TagStream const b{{1000, 1, 0}, {1002, 1, 0}, {1003, 1, 0}, {998, 1, 0}};
    TagStream sorted_b = b;
    sort_by_time(sorted_b);
    auto const h = correlate(a, sorted_b, {4, 8, 0, 1});
    ASSERT_EQ(h.size(), 5u);
    // bins centered at -8,-4,0,4,8 covering [c-2, c+2)
    EXPECT_EQ(h.counts[2], 2u);  // -2 and 0
    EXPECT_EQ(h.counts[3], 2u);  // +2 and +3
    EXPECT_EQ(h.bin_center(2), 0);
}

TEST(Correlator, TranslationInvariance) {
    std::mt19937_64 rng(7);
    auto const a = random_stream(rng, 3000, 10'000'000, 0);
    auto const b = random_stream(rng, 3000, 10'000'000, 1);
    CorrelationRequest const req{8, 4000, 0, 1};
    auto const h0 = correlate(a, b, req);
    for (std::uint64_t shift : {1ull, 12'345ull, 1ull << 40}) {
        auto sa = a;
        auto sb = b;
        for (auto &t : sa)
            t.time += shift;
        for (auto &t : sb)
            t.time += shift;
        EXPECT_EQ(correlate(sa, sb, req).counts, h0.counts) << shift;
    }
}

TEST(Correlator, ReflectionSwapsStreams) {
    std::mt19937_64 rng(8);
    auto const a = random_stream(rng, 4000, 5'000'000, 0);
    auto const b = random_stream(rng, 4000, 5'000'000, 1);
    // Odd bin widths make the mirrored bin edges coincide.
    CorrelationRequest const req{3, 3000, 0, 1};
    auto const ab = correlate(a, b, req);
    auto const ba = correlate(b, a, req);
    auto mirrored = ab.counts;
    std::reverse(mirrored.begin(), mirrored.end());
    EXPECT_EQ(mirrored, ba.counts);
}

TEST(Correlator, ChunkingAndThreadsDoNotChangeResult) {
    std::mt19937_64 rng(9);
    auto const a = random_stream(rng, 20'000, 20'000'000, 0);
    auto const b = random_stream(rng, 20'000, 20'000'000, 1);
    CorrelationRequest const req{16, 8000, 0, 1};
    auto const ref = correlate(a, b, req);
    for (unsigned threads : {1u, 2u, 3u})
        for (std::size_t chunk : {1ul, 7ul, 1000ul, 1ul << 20}) {
            auto const h = correlate(a, b, req, {.threads = threads, .chunk = chunk});
            EXPECT_EQ(h.counts, ref.counts) << threads << " " << chunk;
        }
}

TEST(Correlator, MergedChannelsMatchSeparateStreams) {
    std::mt19937_64 rng(10);
    auto const a = random_stream(rng, 2000, 3'000'000, 3);
    auto const b = random_stream(rng, 2500, 3'000'000, 5);
    TagStream merged = a;
    merged.insert(merged.end(), b.begin(), b.end());
    sort_by_time(merged);
    CorrelationRequest const req{4, 2000, 3, 5};
    EXPECT_EQ(correlate_channels(merged, req).counts, correlate(a, b, req).counts);
}

TEST(Correlator, UnsortedInputNamesIndex) {
    TagStream const a{{1, 0, 0}, {5, 0, 0}, {3, 0, 0}};
    TagStream const b{{1, 1, 0}};
    try {
        (void)correlate(a, b, {1, 10, 0, 1});
        FAIL();
    } catch (ContractError const &e) {
        EXPECT_NE(std::string(e.what()).find('2'), std::string::npos) << e.what();
    }
    EXPECT_EQ(first_unsorted_index(a), 2u);
}

TEST(Correlator, RequestValidation) {
    EXPECT_THROW((void)make_histogram({0, 10, 0, 1}), ContractError);
    EXPECT_THROW((void)make_histogram({4, 10, 0, 1}), ContractError);
    EXPECT_EQ(make_histogram({4, 12, 0, 1}).size(), 7u);
    EXPECT_EQ(make_histogram({4, 0, 0, 1}).size(), 1u);
}

TEST(Correlator, EmptyStreams) {
    TagStream const none;
    TagStream const one{{100, 1, 0}};
    auto const h = correlate(none, one, {2, 10, 0, 1});
    EXPECT_EQ(h.total_pairs, 0u);
    EXPECT_EQ(correlate(one, none, {2, 10, 0, 1}).total_pairs, 0u);
}

namespace {

CoincidenceHistogram comb(std::vector<double> const &areas, Picoseconds period,
                          Picoseconds bw) {
    // Rectangular peaks of the given areas at k * period, k = -K..K.
    int const K = static_cast<int>(areas.size() / 2);
    CorrelationRequest const req{bw, K * period + 3200, 0, 1};
    auto h = make_histogram(req);
    for (int k = -K; k <= K; ++k) {
        auto const center = k * period;
        auto const idx = static_cast<std::size_t>((center - h.center_offset) / bw);
        h.counts[idx] = static_cast<std::uint64_t>(areas[static_cast<std::size_t>(k + K)]);
    }
    h.recount();
    return h;
}

} // namespace

TEST(PeakAnalysis, IntegrateAndNormalize) {
    std::vector<double> const areas{100, 100, 100, 100, 100, 75, 50, 75, 100, 100, 100, 100, 100};
    auto const h = comb(areas, 12'500, 4);
    auto const peaks = integrate_peaks(h, 12'500);
    EXPECT_EQ(peaks.half_width, 3125);
    ASSERT_TRUE(peaks.contains(6));
    ASSERT_TRUE(peaks.contains(-6));
    EXPECT_DOUBLE_EQ(peaks.at(0).area, 50);
    EXPECT_DOUBLE_EQ(peaks.at(0).error, std::sqrt(50.0));
    auto const c = normalize_center(peaks);
    EXPECT_DOUBLE_EQ(c.value, 0.5);
    auto const g2 = g2_from_peaks(peaks);
    EXPECT_NEAR(g2.value, 50.0 / 95.0, 1e-12);
}

TEST(PeakAnalysis, PartialPeaksAreDropped) {
    auto const h = make_histogram({4, 20'000, 0, 1});
    auto const peaks = integrate_peaks(h, 12'500);
    EXPECT_TRUE(peaks.contains(0));
    EXPECT_TRUE(peaks.contains(1));
    EXPECT_FALSE(peaks.contains(2));
    EXPECT_THROW((void)normalize_center(peaks), ContractError);
    EXPECT_THROW((void)g2_from_peaks(peaks), ContractError);
}
