#include "qdcascade/coherence.hpp"
#include "qdcascade/errors.hpp"
#include "qdcascade/hom_analysis.hpp"
#include "qdcascade/interferometer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qdcascade;

namespace {

// Envelope written out in SI units: f in Hz, tau in s.
double envelope_si(double fl_uev, double fg_uev, double tau_ps) {
    double const h_ev_s = 4.135667696e-15;
    double const fl = fl_uev * 1e-6 / h_ev_s;
    double const fg = fg_uev * 1e-6 / h_ev_s;
    double const t = tau_ps * 1e-12;
    double const a = std::numbers::pi * fg * t;
    return std::exp(-std::numbers::pi * fl * std::abs(t)) * std::exp(-a * a / (4 * std::log(2.0)));
}

std::vector<CoherencePoint> envelope_points(double fl, double fg, double noise,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, noise);
    std::vector<CoherencePoint> pts;
    for (int i = 0; i < 16; ++i) {
        double const tau = 20.0 * i;
        pts.push_back({tau, envelope_si(fl, fg, tau) + (noise > 0 ? n(rng) : 0.0), noise});
    }
    return pts;
}

} // namespace

TEST(Coherence, OliveroLimits) {
    EXPECT_NEAR(olivero_linewidth(5.0, 0.0), 5.0, 3e-4 * 5.0);
    EXPECT_DOUBLE_EQ(olivero_linewidth(0.0, 4.0), 4.0);
    EXPECT_NEAR(olivero_linewidth(3.0, 4.0), 0.5346 * 3 + std::sqrt(0.2166 * 9 + 16), 1e-12);
}

TEST(Coherence, TransformLimit) {
    auto const [gx, gxx] = transform_limit(175.0, 112.0);
    // hbar = 658.2119569 ueV ps
    EXPECT_NEAR(gx, 658.2119569 / 175.0, 1e-9);
    EXPECT_NEAR(gx, 3.76, 0.005);
    EXPECT_NEAR(gxx, 658.2119569 * (1 / 175.0 + 1 / 112.0), 1e-9);
    EXPECT_DOUBLE_EQ(transform_limit(175.0).second, 0.0);
}

TEST(Coherence, FitRoundTrip) {
    auto const pts = envelope_points(5.0, 5.0, 0.0, 0);
    for (auto const &p : pts)
        EXPECT_NEAR(coherence_envelope({.f_lorentz = 5, .f_gauss = 5}, p.delay_ps), p.visibility,
                    1e-12);
    std::vector<CoherencePoint> unweighted = pts;
    for (auto &p : unweighted)
        p.sigma = 0.0;
    auto const fit = fit_coherence(unweighted, 3.76);
    EXPECT_NEAR(fit.f_lorentz.value, 5.0, 1e-6);
    EXPECT_NEAR(fit.f_gauss.value, 5.0, 1e-6);
    EXPECT_NEAR(fit.gamma.value, olivero_linewidth(5, 5), 1e-6);
    ASSERT_TRUE(fit.ratio);
    EXPECT_NEAR(fit.ratio->value, olivero_linewidth(5, 5) / 3.76, 1e-6);
    EXPECT_NEAR(fit.envelope(100.0), envelope_si(5, 5, 100.0), 1e-9);
}

TEST(Coherence, PureLorentzianStaysIdentifiable) {
    auto const pts = envelope_points(6.0, 0.0, 0.002, 3);
    auto const fit = fit_coherence(pts);
    EXPECT_NEAR(fit.f_lorentz.value, 6.0, 4 * fit.f_lorentz.error);
    EXPECT_LT(fit.f_gauss.value, 1.5);
}

TEST(Coherence, NoisyFitErrorsAreSensible) {
    int inside = 0;
    int const trials = 200;
    for (int t = 0; t < trials; ++t) {
        auto const fit = fit_coherence(envelope_points(4.0, 3.0, 0.01, 100 + t));
        inside += std::abs(fit.f_lorentz.value - 4.0) < 3 * fit.f_lorentz.error ? 1 : 0;
    }
    EXPECT_GE(inside, 0.97 * trials);
}

TEST(Coherence, FringeFitRecoversVisibility) {
    LineShape const line{.f_lorentz = 5, .f_gauss = 5, .center = 1.59};
    MichelsonScan scan;
    scan.coarse_positions_mm = {0.0, 15.0, 30.0};
    scan.steps = 200;
    scan.piezo_step_nm = 10.0;
    auto const data = michelson_scan(line, scan, 9);
    for (auto const &d : data) {
        auto const f = fit_fringe(d.samples, d.wavelength_nm);
        EXPECT_NEAR(f.visibility, d.visibility, 1e-9);
        EXPECT_NEAR(f.i0, 1000.0, 1e-6);
        EXPECT_LT(f.residual_rms, 1e-6);
    }
}

TEST(Coherence, AliasedScanIsRejected) {
    double const lambda = 780.0;
    std::vector<FringeSample> s;
    for (int i = 0; i < 20; ++i)
        s.push_back({i * lambda / 4, 1000.0 + 100 * std::cos(4 * std::numbers::pi * i / 4)});
    EXPECT_THROW((void)fit_fringe(s, lambda), AliasingError);
    s.resize(2);
    s[1].position_nm = 10;
    EXPECT_THROW((void)fit_fringe(s, lambda), FitError);
}

TEST(Coherence, TooFewPointsOrNoDecay) {
    auto pts = envelope_points(5, 5, 0, 0);
    pts.resize(5);
    EXPECT_THROW((void)fit_coherence(pts), FitError);
    std::vector<CoherencePoint> flat;
    for (int i = 0; i < 10; ++i)
        flat.push_back({10.0 * i, 1.0, 0.0});
    EXPECT_THROW((void)fit_coherence(flat), FitError);
}

TEST(HomAnalysis, VisibilityAndCorrection) {
    auto const v = hom_visibility({0.1, 0.01}, {0.5, 0.02});
    EXPECT_NEAR(v.value, 0.8, 1e-15);
    EXPECT_NEAR(v.error, 0.2 * std::hypot(0.1, 0.04), 1e-12);
    EXPECT_NEAR(hom_corrected(0.9, 0.0069, 0.95), 0.9 * 1.0138 / 0.9025, 1e-12);
    EXPECT_NEAR(hom_corrected(0.944, 0.009, 0.985), 0.991, 0.001);
    EXPECT_NEAR(hom_corrected(0.735, 0.0187, 0.985), 0.786, 0.001);
    EXPECT_NEAR(hom_corrected(0.8, 0.0, 1.0), 0.8, 1e-15);
    auto const c = hom_corrected(Measured{0.8, 0.01}, Measured{0.01, 0.001}, 1.0);
    EXPECT_NEAR(c.value, 0.816, 1e-12);
    EXPECT_NEAR(c.error, std::hypot(0.01 * 1.02, 0.8 * 2 * 0.001), 1e-12);
    EXPECT_THROW((void)hom_visibility({0.1, 0.01}, {0.0, 0.0}), ContractError);
    EXPECT_THROW((void)hom_corrected(0.8, 0.0, 0.0), ContractError);
    EXPECT_THROW((void)hom_corrected(0.8, -0.1, 1.0), ContractError);
    auto const rec = make_visibility_record({0.1, 0.01}, {0.5, 0.02}, {0.0069, 0.001}, 0.95);
    EXPECT_NEAR(rec.v_corr.value, hom_corrected(0.8, 0.0069, 0.95), 1e-12);
}
