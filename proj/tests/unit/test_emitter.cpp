#include "support.hpp"

#include "qdcascade/emitter.hpp"
#include "qdcascade/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qdcascade;

namespace {

// 1% critical value of the one-sample KS statistic, large-n limit.
constexpr double ks_crit_1pct = 1.628;

bool same_photons(PhotonStream const &a, PhotonStream const &b) {
    if (a.photons.size() != b.photons.size())
        return false;
    for (std::size_t i = 0; i < a.photons.size(); ++i) {
        auto const &p = a.photons[i];
        auto const &q = b.photons[i];
        if (p.pulse != q.pulse || p.emission != q.emission || p.packet_start != q.packet_start ||
            p.pulse_offset != q.pulse_offset || p.origin != q.origin)
            return false;
    }
    return true;
}

double hypoexp_cdf(double t, double a, double b) {
    return 1.0 - (b * std::exp(-t / b) - a * std::exp(-t / a)) / (b - a);
}

} // namespace

TEST(Emitter, CascadeDelaysAreExponential) {
    EmitterModel const em{.tau_xx = 161, .tau_x = 619};
    auto const e = emit_cascade(em, {}, 200'000, 11);
    std::vector<double> xx, gap;
    for (auto const &p : e.xx.photons)
        xx.push_back(p.emission);
    for (auto const &p : e.x.photons)
        gap.push_back(p.emission - p.packet_start);
    double const n = static_cast<double>(xx.size());
    EXPECT_LT(testsupport::ks_exponential(xx, 161) * std::sqrt(n), ks_crit_1pct);
    EXPECT_LT(testsupport::ks_exponential(gap, 619) * std::sqrt(n), ks_crit_1pct);
}

TEST(Emitter, ExcitonArrivalIsHypoexponential) {
    EmitterModel const em{.tau_xx = 133, .tau_x = 227};
    auto const e = emit_cascade(em, {}, 100'000, 12);
    std::vector<double> t;
    for (auto const &p : e.x.photons)
        t.push_back(p.emission);
    std::sort(t.begin(), t.end());
    double d = 0.0;
    double const n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        double const f = hypoexp_cdf(t[i], 133, 227);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    EXPECT_LT(d * std::sqrt(n), ks_crit_1pct);
}

TEST(Emitter, ThreadCountDoesNotChangeOutput) {
    EmitterModel const em{.tau_xx = 161, .tau_x = 619, .p_exc = 0.8, .p_multi = 0.01,
                          .background_rate = 5e5};
    auto const clock = LaserClock::from_rep_rate(80e6, 3.0);
    CascadeDetectors dets;
    dets.xx = {.jitter_fwhm = 20, .efficiency = 0.6, .dead_time = 20'000};
    dets.x = {.jitter_fwhm = 30, .efficiency = 0.7, .dead_time = 0};
    SimulationOptions one{.chunk_pulses = 4096, .threads = 1};
    SimulationOptions three{.chunk_pulses = 4096, .threads = 3};
    EXPECT_TRUE(same_photons(emit_cascade(em, clock, 50'000, 5, one).x,
                             emit_cascade(em, clock, 50'000, 5, three).x));
    auto const a = simulate_cascade(em, clock, dets, 50'000, 5, one);
    auto const b = simulate_cascade(em, clock, dets, 50'000, 5, three);
    EXPECT_TRUE(a.xx == b.xx);
    EXPECT_TRUE(a.x == b.x);
    EXPECT_TRUE(a.sync == b.sync);
    auto const c = simulate_cascade(em, clock, dets, 50'000, 6, one);
    EXPECT_FALSE(a.x == c.x);
}

TEST(Emitter, ExcitationProbabilityThinsPulses) {
    EmitterModel const em{.tau_xx = 100, .tau_x = 200, .p_exc = 0.3};
    std::uint64_t const n = 200'000;
    auto const e = emit_cascade(em, {}, n, 13);
    double const mean = 0.3 * n;
    double const sd = std::sqrt(n * 0.3 * 0.7);
    EXPECT_NEAR(static_cast<double>(e.xx.photons.size()), mean, 5 * sd);
    EXPECT_EQ(e.xx.photons.size(), e.x.photons.size());
}

TEST(Emitter, DetectionEfficiencyAndJitter) {
    EmitterModel const em{.tau_xx = 100, .tau_x = 200};
    std::uint64_t const n = 200'000;
    auto const e = emit_cascade(em, {}, n, 14);
    DetectorModel const det{.jitter_fwhm = 40.0, .efficiency = 0.4};
    auto const tags = detect(e.xx, det, 0.0, 1, 14, 1);
    double const sd = std::sqrt(n * 0.4 * 0.6);
    EXPECT_NEAR(static_cast<double>(tags.size()), 0.4 * n, 5 * sd);
    EXPECT_TRUE(is_time_sorted(tags));
    for (auto const &t : tags)
        EXPECT_EQ(t.channel, 1);

    // Zero-lifetime emitter: tag time minus nominal pulse time is pure jitter.
    EmitterModel const prompt{.tau_xx = 1e-6, .tau_x = 1e-6};
    auto const p = emit_cascade(prompt, {}, n, 15);
    auto const ptags = detect(p.xx, {.jitter_fwhm = 40.0, .efficiency = 1.0}, 0.0, 1, 15, 1);
    ASSERT_EQ(ptags.size(), n);
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double const d = static_cast<double>(ptags[k].time) -
                         static_cast<double>(p.xx.nominal_pulse_time(k));
        s += d;
        s2 += d * d;
    }
    double const mean = s / n;
    double const sigma = std::sqrt(s2 / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 0.5);
    // Integer rounding adds 1/12 ps^2 of variance.
    EXPECT_NEAR(sigma, std::sqrt(std::pow(40.0 / 2.354820045, 2) + 1.0 / 12.0), 0.2);
}

TEST(Emitter, BackgroundIsPoissonOverTimeline) {
    EmitterModel const em{.tau_xx = 100, .tau_x = 200, .p_exc = 0.0};
    std::uint64_t const n = 100'000;
    auto const e = emit_cascade(em, {}, n, 16);
    double const rate = 2e6;
    auto const tags = detect(e.x, {}, rate, 2, 16, 2);
    double const span_s = static_cast<double>(e.x.span_end()) * 1e-12;
    double const mean = rate * span_s;
    EXPECT_NEAR(static_cast<double>(tags.size()), mean, 5 * std::sqrt(mean));
    for (auto const &t : tags)
        EXPECT_LT(t.time, e.x.span_end());
}

TEST(Emitter, DeadTimeSeparatesTags) {
    EmitterModel const em{.tau_xx = 100, .tau_x = 200, .background_rate = 5e7};
    auto const e = emit_cascade(em, {}, 20'000, 17);
    DetectorModel const det{.jitter_fwhm = 10, .efficiency = 1.0, .dead_time = 25'000};
    auto const tags = detect(e.xx, det, em.background_rate, 1, 17, 1);
    ASSERT_GT(tags.size(), 100u);
    for (std::size_t i = 1; i < tags.size(); ++i)
        ASSERT_GE(tags[i].time - tags[i - 1].time, 25'000u) << i;
}

TEST(Emitter, SyncTagsOnePerPulse) {
    auto const clock = LaserClock::from_rep_rate(76e6);
    auto const e = emit_cascade({.tau_xx = 100, .tau_x = 200}, clock, 1000, 18);
    auto const sync = sync_tags(e, {}, 0, 18);
    ASSERT_EQ(sync.size(), 1000u);
    for (std::size_t k = 0; k < sync.size(); ++k)
        EXPECT_EQ(sync[k].time, e.xx.nominal_pulse_time(k));
    EXPECT_EQ(clock.period, 13'158);
}

TEST(Emitter, MultiPhotonProbabilityInvertsG2) {
    for (double g2 : {0.0, 0.002, 0.0069, 0.05, 0.3}) {
        double const p = p_multi_for_g2(g2, 1.0);
        EmitterModel const em{.p_exc = 1.0, .p_multi = p};
        EXPECT_NEAR(expected_g2(em), g2, 1e-12) << g2;
    }
    double const p = p_multi_for_g2(0.01, 0.5);
    EXPECT_NEAR(expected_g2({.p_exc = 0.5, .p_multi = p}), 0.01, 1e-12);
    EXPECT_THROW((void)p_multi_for_g2(0.6, 1.0), ContractError);
    EXPECT_THROW((void)p_multi_for_g2(-0.1, 1.0), ContractError);
}

TEST(Emitter, Validation) {
    EXPECT_THROW((void)emit_cascade({.tau_xx = 0, .tau_x = 1}, {}, 10, 1), ContractError);
    EXPECT_THROW((void)emit_cascade({.tau_xx = 1, .tau_x = 1, .p_exc = 1.5}, {}, 10, 1),
                 ContractError);
    LaserClock bad;
    bad.period = 10'000;  // inconsistent with 80 MHz
    EXPECT_THROW((void)emit_cascade({}, bad, 10, 1), ContractError);
    EXPECT_THROW((void)detect({}, {.efficiency = 2.0}, 0, 1, 1, 1), ContractError);
    EXPECT_THROW((void)LaserClock::from_rep_rate(0.0), ContractError);
}
