// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// below; `--criterion N` runs a single criterion (used by ctest).

#include "support.hpp"

#include "qdcascade/coherence.hpp"
#include "qdcascade/correlator.hpp"
#include "qdcascade/emitter.hpp"
#include "qdcascade/field_models.hpp"
#include "qdcascade/hom_analysis.hpp"
#include "qdcascade/interferometer.hpp"
#include "qdcascade/lifetime_fit.hpp"
#include "qdcascade/pipeline.hpp"
#include "qdcascade/purity.hpp"
#include "qdcascade/reproduce.hpp"
#include "qdcascade/stark.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace qdcascade;

namespace {

namespace tol {
constexpr double purity = 1e-3;
constexpr double purity_seconds = 30.0;
constexpr double hom_visibility = 0.02;
constexpr double hom_seconds = 300.0;
constexpr double peak_area = 0.02;
constexpr double peak_sigmas = 3.0;
constexpr double g2_poisson = 0.02;
constexpr double g2_ideal_max = 0.002;
constexpr double g2_multi = 0.002;
constexpr double lifetime_rel = 0.03;
constexpr double ratio = 0.017;
constexpr double stark_coverage = 0.99;
constexpr double stark_exact = 1e-6;
constexpr double sum_rule = 1e-12;
constexpr double well_rel = 1e-3;
constexpr double virial_rel = 5e-3;
constexpr double collapse_uev = 1.0;
constexpr double collapse_mismatch_uev = 5.0;
constexpr double olivero = 1e-4;
constexpr double coherence_rel = 0.05;
constexpr double transform_limit = 0.005;
constexpr double correction = 0.001;
constexpr double throughput_soft = 1e7;  // reported only
constexpr double onset_v = 0.05;
} // namespace tol

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, std::string const &what) {
        pass = pass && ok;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAIL]");
    }
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<int, PeakArea> &accumulate(std::map<int, PeakArea> &acc, PeakAreas const &p) {
    for (auto const &[k, a] : p.areas) {
        auto &dst = acc[k];
        dst.area += a.area;
        dst.error = std::sqrt(dst.error * dst.error + a.error * a.error);
    }
    return acc;
}

DetectorModel bench_detector() { return {.jitter_fwhm = 15.0}; }

// 1 -------------------------------------------------------------------------
void purity_criterion(Outcome &o) {
    auto const t0 = std::chrono::steady_clock::now();
    double const tau_x = 619.0;
    for (double r : {0.1, 0.26, 0.5, 0.64, 1.0}) {
        auto const res = purity_oracle(r * tau_x, tau_x, 2048);
        double const err = std::abs(res.purity - 1.0 / (1.0 + r));
        o.check(err < tol::purity, "r=" + fmt(r) + " err " + fmt(err, 2));
    }
    double const s = seconds_since(t0);
    o.check(s < tol::purity_seconds, "runtime " + fmt(s, 3) + " s");
}

// 2 -------------------------------------------------------------------------
void hom_criterion(Outcome &o) {
    auto const t0 = std::chrono::steady_clock::now();
    struct Case {
        double tau_xx, tau_x, expected;
    };
    // Ten blocks of 10^6 pulses with independent seeds; peak areas add.
    std::uint64_t const blocks = 10;
    std::uint64_t const pulses = 1'000'000;
    for (auto const c : {Case{161, 619, 0.794}, Case{112, 175, 0.610}}) {
        EmitterModel em{.tau_xx = c.tau_xx, .tau_x = c.tau_x, .p_exc = 1.0, .p_multi = 0.0};
        std::map<int, PeakArea> co, cross;
        for (std::uint64_t b = 0; b < blocks; ++b) {
            auto const run = simulate_hom_visibility(em, LaserClock{}, bench_detector(),
                                                     HomBench{}, EmissionLine::x, pulses,
                                                     1000 + 17 * b);
            accumulate(co, run.co.peaks);
            accumulate(cross, run.cross.peaks);
        }
        PeakAreas pc, px;
        pc.areas = co;
        px.areas = cross;
        auto const v = hom_visibility(normalize_center(pc), normalize_center(px));
        o.check(std::abs(v.value - c.expected) <= tol::hom_visibility,
                "V_raw(" + fmt(c.tau_xx) + "," + fmt(c.tau_x) + ") = " + fmt(v.value) + " +- " +
                    fmt(v.error, 2) + " (expect " + fmt(c.expected) + ")");
    }
    double const s = seconds_since(t0);
    o.check(s < tol::hom_seconds, "runtime " + fmt(s, 3) + " s");
}

// 3 -------------------------------------------------------------------------
void peak_pattern_criterion(Outcome &o) {
    auto const e = emit_cascade(EmitterModel{}, LaserClock{}, 2'000'000, 31);
    HomBench bench;
    bench.polarization = Polarization::cross;
    auto const run = run_hom(e.x, bench, bench_detector(), 32);
    double side = 0.0;
    int n = 0;
    for (auto const &[k, a] : run.peaks.areas)
        if (std::abs(k) >= 2) {
            side += a.area;
            ++n;
        }
    side /= n;
    auto const oracle = testsupport::hom_path_oracle(0.0);
    double const nominal[] = {1.0, 1.0, 0.75, 0.5, 0.75, 1.0, 1.0};
    double worst = 0.0;
    double worst_z = 0.0;
    bool oracle_agrees = true;
    for (int k = -3; k <= 3; ++k) {
        auto const &a = run.peaks.at(k);
        double const v = a.area / side;
        double const sigma = v * std::sqrt(1.0 / a.area + 1.0 / (side * n));
        worst = std::max(worst, std::abs(v - nominal[k + 3]));
        worst_z = std::max(worst_z, std::abs(v - oracle.at(k)) / sigma);
        oracle_agrees = oracle_agrees && std::abs(oracle.at(k) - nominal[k + 3]) < 1e-15;
    }
    o.check(worst <= tol::peak_area, "max |area - nominal| " + fmt(worst, 2));
    o.check(worst_z <= tol::peak_sigmas, "max deviation from 16-path oracle " +
                                              fmt(worst_z, 3) + " sigma");
    o.check(oracle_agrees, "oracle reproduces nominal pattern");
}

// 4 -------------------------------------------------------------------------
void g2_criterion(Outcome &o) {
    PipelineOptions popt;
    auto const poisson = simulate_coherent_g2(LaserClock{}, 0.5, bench_detector(), 1'000'000, 41,
                                              popt);
    o.check(std::abs(poisson.value - 1.0) <= tol::g2_poisson,
            "coherent g2 " + fmt(poisson.value) + " +- " + fmt(poisson.error, 2));
    auto const ideal = simulate_cascade_g2(EmitterModel{}, LaserClock{}, bench_detector(),
                                           EmissionLine::x, 1'000'000, 42, popt);
    o.check(ideal.value < tol::g2_ideal_max, "ideal cascade g2 " + fmt(ideal.value, 2));
    EmitterModel multi;
    multi.p_multi = p_multi_for_g2(0.0069, multi.p_exc);
    auto const m = simulate_cascade_g2(multi, LaserClock{}, bench_detector(), EmissionLine::x,
                                       2'000'000, 43, popt);
    o.check(std::abs(m.value - 0.0069) <= tol::g2_multi,
            "multi-photon g2 " + fmt(m.value) + " +- " + fmt(m.error, 2) + " (target 0.0069)");
}

// 5 -------------------------------------------------------------------------
void lifetime_criterion(Outcome &o) {
    EmitterModel const em{.tau_xx = 133, .tau_x = 227};
    CascadeDetectors dets;
    dets.xx = {.jitter_fwhm = 21.0};
    dets.x = {.jitter_fwhm = 21.0};
    dets.sync = {};
    auto const tags = simulate_cascade(em, LaserClock{}, dets, 1'000'000, 51);
    CorrelationRequest const req{4, 6'000, 0, 2};
    auto const hist = correlate(tags.sync, tags.x, req);
    LifetimeFitOptions opt;
    opt.irf.fwhm = 21.0;
    opt.tau_xx_hint = 133.0;
    auto const fit = fit_lifetime_bi(hist, opt);
    o.check(fit.model == LifetimeModel::bi, "biexponential model selected");
    double const exx = std::abs(fit.tau_xx.value / 133.0 - 1.0);
    double const ex = fit.tau_x ? std::abs(fit.tau_x->value / 227.0 - 1.0) : 1.0;
    o.check(exx <= tol::lifetime_rel,
            "tau_xx " + fmt(fit.tau_xx.value) + " +- " + fmt(fit.tau_xx.error, 2));
    o.check(ex <= tol::lifetime_rel,
            "tau_x " + fmt(fit.tau_x ? fit.tau_x->value : 0.0) + " +- " +
                fmt(fit.tau_x ? fit.tau_x->error : 0.0, 2));
    if (fit.tau_x) {
        auto const r = fit.ratio();
        o.check(std::abs(r.value - 0.586) <= tol::ratio,
                "r " + fmt(r.value) + " +- " + fmt(r.error, 2) + " (0.586 +- 0.017)");
    }
    o.detail << "; counts " << hist.total_pairs;
}

// 6 -------------------------------------------------------------------------
void stark_criterion(Outcome &o) {
    auto const &rows = replica_stark_table();
    DiodeGeometry const geom;
    double worst = 0.0;
    for (auto const &r : rows)
        for (auto const *p : {&r.xx, &r.x}) {
            std::vector<StarkPoint> pts;
            for (int i = 0; i <= 30; ++i) {
                double const v = -2.0 + 0.1 * i;
                pts.push_back({v, stark_energy(*p, capacitor_field(v, geom)), 0.0});
            }
            auto const fit = fit_stark(pts, geom);
            worst = std::max({worst, std::abs(fit.e0.value / p->e0.value - 1.0),
                              std::abs(fit.alpha.value / p->alpha.value - 1.0),
                              std::abs(fit.beta.value / p->beta.value - 1.0)});
        }
    o.check(worst < tol::stark_exact, "noiseless recovery, worst rel error " + fmt(worst, 2));

    std::mt19937_64 rng(61);
    auto const &truth = rows.front().x;
    std::normal_distribution<double> noise(0.0, 20e-6);
    int const trials = 500;
    int covered = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<StarkPoint> pts;
        for (int i = 0; i <= 30; ++i) {
            double const v = -2.0 + 0.1 * i;
            pts.push_back({v, stark_energy(truth, capacitor_field(v, geom)) + noise(rng), 20e-6});
        }
        auto const fit = fit_stark(pts, geom);
        bool const in = std::abs(fit.e0.value - truth.e0.value) < 3 * fit.e0.error &&
                        std::abs(fit.alpha.value - truth.alpha.value) < 3 * fit.alpha.error &&
                        std::abs(fit.beta.value - truth.beta.value) < 3 * fit.beta.error;
        covered += in ? 1 : 0;
    }
    double const cov = static_cast<double>(covered) / trials;
    o.check(cov >= tol::stark_coverage, "3-sigma coverage " + fmt(cov));

    auto const s = state_params(rows.front().xx, rows.front().x);
    o.check(std::abs(s.beta.value - 125.2) < tol::sum_rule, "beta " + fmt(s.beta.value, 7));
    o.check(std::abs(s.alpha.value + 0.335) < tol::sum_rule, "alpha " + fmt(s.alpha.value, 7));
    o.check(std::abs(s.e0.value - 3.181929) < tol::sum_rule, "E0 " + fmt(s.e0.value, 8));
}

// 7 -------------------------------------------------------------------------
void well_criterion(Outcome &o) {
    TrapFieldModel const trap;
    double worst = 0.0;
    double worst_virial = 0.0;
    for (int i = 0; i <= 20; ++i) {
        double const f = 1e-3 * std::pow(20.0, i / 20.0);
        auto const a = triangular_well(f, trap);
        auto const n = triangular_well_numeric(f, trap);
        worst = std::max({worst, std::abs(n.energy_mev / a.energy_mev - 1.0),
                          std::abs(n.delta_nm / a.delta_nm - 1.0)});
        worst_virial = std::max(worst_virial,
                                std::abs(n.mean_potential_mev / (2.0 * n.energy_mev / 3.0) - 1.0));
    }
    o.check(worst <= tol::well_rel, "numeric vs Airy max rel " + fmt(worst, 2));
    o.check(worst_virial <= tol::virial_rel, "virial max rel " + fmt(worst_virial, 2));
}

// 8 -------------------------------------------------------------------------
void collapse_criterion(Outcome &o) {
    auto const &master = replica_stark_table().front().x;
    DiodeGeometry const geom;
    TrapFieldModel const truth;
    auto const exact = replica_collapse(master, geom, truth, truth);
    o.check(exact.max_residual_uev < tol::collapse_uev,
            "matched max residual " + fmt(exact.max_residual_uev, 2) + " ueV");
    for (double scale : {0.9, 1.1}) {
        TrapFieldModel assumed = truth;
        assumed.epsilon_r *= scale;
        auto const off = replica_collapse(master, geom, truth, assumed);
        o.check(off.max_residual_uev < tol::collapse_mismatch_uev,
                "epsilon_r x" + fmt(scale) + " max residual " + fmt(off.max_residual_uev, 3) +
                    " ueV");
    }
}

// 9 -------------------------------------------------------------------------
void coherence_criterion(Outcome &o) {
    double const g = olivero_linewidth(5.0, 0.0);
    o.check(std::abs(g / 5.0 - 1.0) <= tol::olivero, "Olivero f_G=0 ratio " + fmt(g / 5.0, 6));

    LineShape const line{.f_lorentz = 5.0, .f_gauss = 5.0, .center = 1.59};
    MichelsonScan scan;
    for (int i = 0; i <= 12; ++i)
        scan.coarse_positions_mm.push_back(5.0 * i);
    scan.noise = 0.01;
    auto const data = michelson_scan(line, scan, 91);
    std::vector<CoherencePoint> pts;
    for (auto const &d : data)
        pts.push_back({d.delay_ps, fit_fringe(d.samples, d.wavelength_nm).visibility, 0.0});
    auto const fit = fit_coherence(pts);
    o.check(std::abs(fit.f_lorentz.value / 5.0 - 1.0) <= tol::coherence_rel,
            "f_L " + fmt(fit.f_lorentz.value) + " +- " + fmt(fit.f_lorentz.error, 2));
    o.check(std::abs(fit.f_gauss.value / 5.0 - 1.0) <= tol::coherence_rel,
            "f_G " + fmt(fit.f_gauss.value) + " +- " + fmt(fit.f_gauss.error, 2));
    double const g0 = transform_limit(175.0).first;
    o.check(std::abs(g0 - 3.76) <= tol::transform_limit, "Gamma0(175 ps) " + fmt(g0) + " ueV");
}

// 10 ------------------------------------------------------------------------
void correction_criterion(Outcome &o) {
    double const v = hom_corrected(0.944, 0.009, 0.985);
    o.check(std::abs(v - 0.991) <= tol::correction, "v_corr " + fmt(v));
}

// 11 ------------------------------------------------------------------------
void correlator_criterion(Outcome &o) {
    std::mt19937_64 rng(111);
    std::uniform_int_distribution<std::size_t> size(0, 10'000);
    std::uniform_int_distribution<int> bw_pick(1, 64);
    std::uniform_int_distribution<int> nbins(0, 300);
    auto stream = [&](std::size_t n, std::uint64_t span, std::uint16_t ch) {
        std::uniform_int_distribution<std::uint64_t> when(0, span);
        TagStream t(n);
        for (auto &x : t)
            x = {when(rng), ch, 0};
        sort_by_time(t);
        return t;
    };
    int identical = 0;
    int const cases = 100;
    for (int i = 0; i < cases; ++i) {
        std::size_t const na = size(rng), nb = size(rng);
        Picoseconds const bw = bw_pick(rng);
        Picoseconds const window = bw * nbins(rng);
        std::uint64_t const span = i % 3 == 0 ? 5'000 : 100'000'000;
        auto const a = stream(na, span, 0);
        auto const b = stream(nb, span, 1);
        auto const h = correlate(a, b, {bw, window, 0, 1});
        identical += h.counts == testsupport::brute_force_histogram(a, b, bw, window) ? 1 : 0;
    }
    o.check(identical == cases, std::to_string(identical) + "/" + std::to_string(cases) +
                                    " cases bin-identical");

    // Throughput on a cascade-like pair of streams (reported only).
    auto const a = stream(4'000'000, 50'000'000'000ull, 0);
    auto const b = stream(4'000'000, 50'000'000'000ull, 1);
    auto const t0 = std::chrono::steady_clock::now();
    auto const h = correlate(a, b, {4, 75'000, 0, 1});
    double const s = seconds_since(t0);
    double const rate = static_cast<double>(a.size() + b.size()) / s;
    o.detail << "; throughput " << fmt(rate / 1e6, 3) << " Mtags/s ("
             << (rate >= tol::throughput_soft ? "meets" : "below") << " soft 10 Mtags/s target, "
             << h.total_pairs << " pairs)";
}

// 12 ------------------------------------------------------------------------
void onset_criterion(Outcome &o) {
    DiodeGeometry const geom{.vb = 1.7, .thickness = 305.0};
    TrapFieldModel const trap{.d = 15.1};
    double const v = franz_keldysh_onset(1.73, 1.59, geom, trap);
    o.check(std::abs(v - (-1.13)) < 0.005, "V_onset " + fmt(v) + " V");
    o.check(std::abs(v - (-1.16)) <= tol::onset_v,
            "gap to measured -1.16 V: " + fmt(std::abs(v + 1.16), 2) + " V");
}

struct Criterion {
    char const *title;
    std::function<void(Outcome &)> run;
};

std::vector<Criterion> const &criteria() {
    static std::vector<Criterion> const list{
        {"purity oracle vs 1/(1+r)", purity_criterion},
        {"end-to-end HOM visibility", hom_criterion},
        {"cross-polarized peak pattern", peak_pattern_criterion},
        {"g2 pipeline", g2_criterion},
        {"lifetime fits", lifetime_criterion},
        {"Stark suite", stark_criterion},
        {"triangular well", well_criterion},
        {"replica collapse", collapse_criterion},
        {"coherence", coherence_criterion},
        {"correction formula", correction_criterion},
        {"correlator", correlator_criterion},
        {"Franz-Keldysh onset", onset_criterion},
    };
    return list;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"qdcascade acceptance suite"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-12)")
        ->check(CLI::Range(1, static_cast<int>(criteria().size())));
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (std::size_t i = 0; i < criteria().size(); ++i) {
        if (only != 0 && static_cast<int>(i + 1) != only)
            continue;
        auto const &c = criteria()[i];
        Outcome o;
        auto const t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (std::exception const &e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("criterion %2zu %s  %s  (%.1f s)  %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                    c.title, seconds_since(t0), o.detail.str().c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
