#include "qdcascade/emitter.hpp"

#include "qdcascade/correlator.hpp"
#include "qdcascade/errors.hpp"
#include "qdcascade/parallel.hpp"
#include "qdcascade/rng.hpp"
#include "qdcascade/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qdcascade {

namespace {

void require_probability(double p, char const *name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ContractError(std::string(name) + " must lie in [0, 1]");
}

double sigma_from_fwhm(double fwhm) noexcept {
    return fwhm / units::gaussian_fwhm_per_sigma;
}

std::size_t chunk_count(std::uint64_t n, std::uint64_t chunk) {
    return static_cast<std::size_t>((n + chunk - 1) / chunk);
}

void check_capacity(LaserClock const &clock, std::uint64_t n_pulses) {
    // Room for the pulse train plus generous emission tails.
    auto const limit = std::numeric_limits<std::uint64_t>::max() / 2;
    auto const period = static_cast<std::uint64_t>(clock.period);
    if (n_pulses > (limit - 4 * period) / period) {
        throw CapacityError("simulation of " + std::to_string(n_pulses) +
                            " pulses overflows the 64-bit picosecond range");
    }
}

template <typename T>
std::vector<T> concatenate(std::vector<std::vector<T>> &parts) {
    std::size_t total = 0;
    for (auto const &p : parts)
        total += p.size();
    std::vector<T> out;
    out.reserve(total);
    for (auto &p : parts) {
        out.insert(out.end(), p.begin(), p.end());
        std::vector<T>().swap(p);
    }
    return out;
}

// Keeps the first tag and every tag at least dead_time after the last kept
// one.
void apply_dead_time(TagStream &tags, double dead_time) {
    if (dead_time <= 0.0 || tags.empty())
        return;
    auto const dt = static_cast<std::uint64_t>(std::llround(dead_time));
    std::size_t out = 1;
    std::uint64_t last = tags[0].time;
    for (std::size_t i = 1; i < tags.size(); ++i) {
        if (tags[i].time - last >= dt) {
            last = tags[i].time;
            tags[out++] = tags[i];
        }
    }
    tags.resize(out);
}

std::uint64_t to_tag_time(std::uint64_t nominal, double offset) noexcept {
    auto const rounded = std::llround(offset);
    if (rounded >= 0)
        return nominal + static_cast<std::uint64_t>(rounded);
    auto const back = static_cast<std::uint64_t>(-rounded);
    return back > nominal ? 0 : nominal - back;
}

constexpr std::uint16_t background_flag = 0x100;

} // namespace

void EmitterModel::validate() const {
    if (!(tau_xx > 0.0) || !(tau_x > 0.0))
        throw ContractError("emitter lifetimes must be positive");
    require_probability(p_exc, "emitter.p_exc");
    require_probability(p_multi, "emitter.p_multi");
    if (!(background_rate >= 0.0))
        throw ContractError("emitter.background_rate must be non-negative");
}

LaserClock LaserClock::from_rep_rate(double rep_rate_hz,
                                     double pulse_jitter_fwhm) {
    if (!(rep_rate_hz > 0.0))
        throw ContractError("laser repetition rate must be positive");
    LaserClock clock;
    clock.rep_rate = rep_rate_hz;
    clock.period = std::llround(1e12 / rep_rate_hz);
    clock.pulse_jitter_fwhm = pulse_jitter_fwhm;
    return clock;
}

void LaserClock::validate() const {
    if (period <= 0)
        throw ContractError("laser period must be positive");
    if (!(rep_rate > 0.0) ||
        std::abs(1e12 / rep_rate - static_cast<double>(period)) > 1.0)
        throw ContractError("laser period must equal 1/rep_rate to 1 ps");
    if (!(pulse_jitter_fwhm >= 0.0))
        throw ContractError("laser pulse jitter must be non-negative");
}

void DetectorModel::validate() const {
    if (!(jitter_fwhm >= 0.0))
        throw ContractError("detector jitter must be non-negative");
    require_probability(efficiency, "detector.efficiency");
    if (!(dead_time >= 0.0))
        throw ContractError("detector dead time must be non-negative");
}

CascadeEmission emit_cascade(EmitterModel const &emitter,
                             LaserClock const &clock, std::uint64_t n_pulses,
                             std::uint64_t seed,
                             SimulationOptions const &options) {
    emitter.validate();
    clock.validate();
    check_capacity(clock, n_pulses);
    if (options.chunk_pulses == 0)
        throw ContractError("chunk_pulses must be positive");

    auto const n_chunks = chunk_count(n_pulses, options.chunk_pulses);
    bool const jittered = clock.pulse_jitter_fwhm > 0.0;
    std::vector<std::vector<Photon>> xx_parts(n_chunks), x_parts(n_chunks);
    std::vector<std::vector<float>> jitter_parts(jittered ? n_chunks : 0);

    parallel_for(n_chunks, options.threads, [&](std::size_t c) {
        auto rng = substream(seed, streams::emission, c);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::exponential_distribution<double> decay_xx(1.0 / emitter.tau_xx);
        std::exponential_distribution<double> decay_x(1.0 / emitter.tau_x);
        std::normal_distribution<double> pulse_noise(
            0.0, sigma_from_fwhm(clock.pulse_jitter_fwhm));

        auto const begin = c * options.chunk_pulses;
        auto const end = std::min<std::uint64_t>(n_pulses, begin + options.chunk_pulses);
        auto &xx = xx_parts[c];
        auto &x = x_parts[c];
        auto const expected =
            static_cast<std::size_t>((end - begin) * (emitter.p_exc + emitter.p_multi) * 1.05) + 16;
        xx.reserve(expected);
        x.reserve(expected);
        if (jittered)
            jitter_parts[c].reserve(end - begin);

        auto push_sorted = [](std::vector<Photon> &v, std::size_t pulse_start) {
            // At most two photons per pulse and line.
            if (v.size() - pulse_start == 2 &&
                v[pulse_start + 1].emission < v[pulse_start].emission)
                std::swap(v[pulse_start], v[pulse_start + 1]);
        };

        for (auto k = begin; k < end; ++k) {
            float const offset = jittered ? static_cast<float>(pulse_noise(rng)) : 0.0f;
            if (jittered)
                jitter_parts[c].push_back(offset);
            auto const xx_start = xx.size();
            auto const x_start = x.size();
            if (uniform(rng) < emitter.p_exc) {
                double const t_xx = decay_xx(rng);
                double const t_x = t_xx + decay_x(rng);
                xx.push_back({k, offset, 0.0f, static_cast<float>(t_xx),
                              PhotonOrigin::cascade, 0});
                x.push_back({k, offset, static_cast<float>(t_xx),
                             static_cast<float>(t_x), PhotonOrigin::cascade, 0});
            }
            if (emitter.p_multi > 0.0) {
                if (uniform(rng) < emitter.p_multi) {
                    xx.push_back({k, offset, 0.0f,
                                  static_cast<float>(decay_xx(rng)),
                                  PhotonOrigin::multi_photon, 0});
                }
                if (uniform(rng) < emitter.p_multi) {
                    x.push_back({k, offset, 0.0f,
                                 static_cast<float>(decay_x(rng)),
                                 PhotonOrigin::multi_photon, 0});
                }
                push_sorted(xx, xx_start);
                push_sorted(x, x_start);
            }
        }
    });

    CascadeEmission out;
    out.clock = clock;
    out.n_pulses = n_pulses;
    for (auto *stream : {&out.xx, &out.x}) {
        stream->first_pulse_time = clock.period;
        stream->period = clock.period;
        stream->n_pulses = n_pulses;
    }
    out.xx.line = EmissionLine::xx;
    out.xx.tau = emitter.tau_xx;
    out.x.line = EmissionLine::x;
    out.x.tau = emitter.tau_x;
    out.xx.photons = concatenate(xx_parts);
    out.x.photons = concatenate(x_parts);
    if (jittered)
        out.pulse_offsets = concatenate(jitter_parts);
    return out;
}

PhotonStream emit_coherent(LaserClock const &clock, double mean_photons,
                           double tau, std::uint64_t n_pulses,
                           std::uint64_t seed,
                           SimulationOptions const &options) {
    clock.validate();
    check_capacity(clock, n_pulses);
    if (!(mean_photons >= 0.0) || !(tau > 0.0))
        throw ContractError("coherent source needs mean >= 0 and tau > 0");

    auto const n_chunks = chunk_count(n_pulses, options.chunk_pulses);
    std::vector<std::vector<Photon>> parts(n_chunks);
    parallel_for(n_chunks, options.threads, [&](std::size_t c) {
        auto rng = substream(seed, streams::coherent, c);
        std::poisson_distribution<int> count(mean_photons);
        std::exponential_distribution<double> delay(1.0 / tau);
        auto const begin = c * options.chunk_pulses;
        auto const end = std::min<std::uint64_t>(n_pulses, begin + options.chunk_pulses);
        auto &v = parts[c];
        std::vector<float> delays;
        for (auto k = begin; k < end; ++k) {
            int const n = mean_photons > 0.0 ? count(rng) : 0;
            delays.clear();
            for (int i = 0; i < n; ++i)
                delays.push_back(static_cast<float>(delay(rng)));
            std::sort(delays.begin(), delays.end());
            for (float d : delays)
                v.push_back({k, 0.0f, 0.0f, d, PhotonOrigin::coherent, 0});
        }
    });

    PhotonStream out;
    out.line = EmissionLine::xx;
    out.tau = tau;
    out.first_pulse_time = clock.period;
    out.period = clock.period;
    out.n_pulses = n_pulses;
    out.photons = concatenate(parts);
    return out;
}

TagStream detect(PhotonStream const &photons, DetectorModel const &detector,
                 double background_rate, std::uint16_t channel,
                 std::uint64_t seed, std::uint64_t stream_id,
                 SimulationOptions const &options) {
    detector.validate();
    if (!(background_rate >= 0.0))
        throw ContractError("background rate must be non-negative");

    constexpr std::size_t photons_per_chunk = 1u << 16;
    auto const &src = photons.photons;
    auto const n_chunks = chunk_count(src.size(), photons_per_chunk);
    double const sigma = sigma_from_fwhm(detector.jitter_fwhm);

    std::vector<TagStream> parts(n_chunks);
    parallel_for(n_chunks, options.threads, [&](std::size_t c) {
        auto rng = substream(seed, streams::detection * 65536 + stream_id, c);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::normal_distribution<double> jitter(0.0, sigma);
        auto const begin = c * photons_per_chunk;
        auto const end = std::min(src.size(), begin + photons_per_chunk);
        auto &out = parts[c];
        out.reserve(end - begin);
        for (auto i = begin; i < end; ++i) {
            auto const &p = src[i];
            if (detector.efficiency < 1.0 && !(uniform(rng) < detector.efficiency))
                continue;
            double offset = static_cast<double>(p.pulse_offset) +
                            static_cast<double>(p.emission);
            if (sigma > 0.0)
                offset += jitter(rng);
            out.push_back({to_tag_time(photons.nominal_pulse_time(p.pulse), offset),
                           channel, p.route});
        }
    });

    // Background: Poisson process over [0, span_end) in fixed 10 ms blocks.
    std::vector<TagStream> background;
    if (background_rate > 0.0) {
        constexpr std::uint64_t block = 10'000'000'000ull;
        auto const span = photons.span_end();
        auto const n_blocks = chunk_count(span, block);
        background.resize(n_blocks);
        parallel_for(n_blocks, options.threads, [&](std::size_t b) {
            auto rng = substream(seed, streams::background * 65536 + stream_id, b);
            auto const lo = b * block;
            auto const hi = std::min<std::uint64_t>(span, lo + block);
            std::poisson_distribution<std::uint64_t> count(
                background_rate * static_cast<double>(hi - lo) * 1e-12);
            std::uniform_int_distribution<std::uint64_t> when(lo, hi - 1);
            auto const n = count(rng);
            auto &out = background[b];
            out.reserve(n);
            for (std::uint64_t i = 0; i < n; ++i)
                out.push_back({when(rng), channel, background_flag});
            sort_by_time(out);
        });
    }

    auto tags = concatenate(parts);
    bool merged = false;
    for (auto const &b : background)
        merged = merged || !b.empty();
    if (merged) {
        auto extra = concatenate(background);
        tags.insert(tags.end(), extra.begin(), extra.end());
    }
    if (merged || !is_time_sorted(tags))
        sort_by_time(tags);
    apply_dead_time(tags, detector.dead_time);
    return tags;
}

TagStream sync_tags(CascadeEmission const &emission,
                    DetectorModel const &detector, std::uint16_t channel,
                    std::uint64_t seed, SimulationOptions const &options) {
    detector.validate();
    auto const n = emission.n_pulses;
    auto const n_chunks = chunk_count(n, options.chunk_pulses);
    double const sigma = sigma_from_fwhm(detector.jitter_fwhm);
    auto const &stream = emission.xx;
    std::vector<TagStream> parts(n_chunks);
    parallel_for(n_chunks, options.threads, [&](std::size_t c) {
        auto rng = substream(seed, streams::sync * 65536 + channel, c);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        std::normal_distribution<double> jitter(0.0, sigma);
        auto const begin = c * options.chunk_pulses;
        auto const end = std::min<std::uint64_t>(n, begin + options.chunk_pulses);
        auto &out = parts[c];
        out.reserve(end - begin);
        for (auto k = begin; k < end; ++k) {
            if (detector.efficiency < 1.0 && !(uniform(rng) < detector.efficiency))
                continue;
            double offset = emission.pulse_offsets.empty()
                                ? 0.0
                                : static_cast<double>(emission.pulse_offsets[k]);
            if (sigma > 0.0)
                offset += jitter(rng);
            out.push_back({to_tag_time(stream.nominal_pulse_time(k), offset), channel, 0});
        }
    });
    auto tags = concatenate(parts);
    if (!is_time_sorted(tags))
        sort_by_time(tags);
    apply_dead_time(tags, detector.dead_time);
    return tags;
}

CascadeTags simulate_cascade(EmitterModel const &emitter,
                             LaserClock const &clock,
                             CascadeDetectors const &detectors,
                             std::uint64_t n_pulses, std::uint64_t seed,
                             SimulationOptions const &options,
                             ChannelMap const &channels) {
    detectors.xx.validate();
    detectors.x.validate();
    detectors.sync.validate();
    auto emission = emit_cascade(emitter, clock, n_pulses, seed, options);
    CascadeTags tags;
    tags.xx = detect(emission.xx, detectors.xx, emitter.background_rate,
                     channels.xx, seed, channels.xx, options);
    std::vector<Photon>().swap(emission.xx.photons);
    tags.x = detect(emission.x, detectors.x, emitter.background_rate,
                    channels.x, seed, channels.x, options);
    std::vector<Photon>().swap(emission.x.photons);
    tags.sync = sync_tags(emission, detectors.sync, channels.sync, seed, options);
    return tags;
}

CoincidenceHistogram irf_from_sync(std::span<TimeTag const> sync,
                                   std::span<TimeTag const> signal,
                                   Picoseconds bin_width, Picoseconds window) {
    if (sync.empty() || signal.empty())
        throw EmptyInputError("irf_from_sync: empty tag stream");
    return correlate(sync, signal, CorrelationRequest{bin_width, window});
}

double expected_g2(EmitterModel const &emitter) noexcept {
    double const mean = emitter.p_exc + emitter.p_multi;
    if (mean <= 0.0)
        return 0.0;
    return 2.0 * emitter.p_exc * emitter.p_multi / (mean * mean);
}

double p_multi_for_g2(double target_g2, double p_exc) {
    if (!(target_g2 >= 0.0 && target_g2 < 0.5))
        throw ContractError("target g2 must lie in [0, 0.5)");
    if (!(p_exc > 0.0 && p_exc <= 1.0))
        throw ContractError("p_exc must lie in (0, 1]");
    if (target_g2 == 0.0)
        return 0.0;
    // 2x / (1 + x)^2 = g with x = p_multi / p_exc; smaller root.
    double const g = target_g2;
    double const x = ((1.0 - g) - std::sqrt(1.0 - 2.0 * g)) / g;
    return std::min(1.0, x * p_exc);
}

} // namespace qdcascade
