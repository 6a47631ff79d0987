#pragma once

// Monte Carlo generation of biexciton (XX) / exciton (X) photon streams from
// a pulsed-laser-driven cascade, and the detector response that turns
// photons into time tags.

#include "qdcascade/timetag.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qdcascade {

/// Cascade parameters. Times in ps, rates in Hz.
struct EmitterModel {
    double tau_xx = 161.0;
    double tau_x = 619.0;
    /// Probability per pulse of preparing the biexciton.
    double p_exc = 1.0;
    /// Probability per pulse of one extra uncorrelated photon on each line.
    double p_multi = 0.0;
    /// Dark / stray counts per detected channel.
    double background_rate = 0.0;

    /// Lifetime ratio r = tau_xx / tau_x.
    [[nodiscard]] double ratio() const noexcept { return tau_xx / tau_x; }
    void validate() const;
};

struct LaserClock {
    double rep_rate = 80e6;
    Picoseconds period = 12'500;
    double pulse_jitter_fwhm = 0.0;

    static LaserClock from_rep_rate(double rep_rate_hz,
                                    double pulse_jitter_fwhm = 0.0);
    void validate() const;
};

struct DetectorModel {
    double jitter_fwhm = 0.0;
    double efficiency = 1.0;
    double dead_time = 0.0;

    void validate() const;
};

enum class EmissionLine : std::uint8_t { xx, x };
enum class PhotonOrigin : std::uint8_t { cascade, multi_photon, coherent };

/// One emitted photon. Times are stored relative to the nominal pulse time
/// first_pulse_time + pulse * period of the owning stream, so absolute
/// picosecond timestamps stay exact for arbitrarily long runs.
struct Photon {
    std::uint64_t pulse = 0;
    /// Laser timing jitter of this pulse.
    float pulse_offset = 0.0f;
    /// Wave-packet start (state preparation) after the jittered pulse.
    float packet_start = 0.0f;
    /// Emission time after the jittered pulse, including any routing delay.
    float emission = 0.0f;
    PhotonOrigin origin = PhotonOrigin::cascade;
    /// Interferometer path / output tag, carried into TimeTag::flags.
    std::uint8_t route = 0;
};

/// Photons of one emission line, sorted by (pulse, emission).
struct PhotonStream {
    EmissionLine line = EmissionLine::xx;
    /// Wave-packet decay constant of this line, ps.
    double tau = 0.0;
    Picoseconds first_pulse_time = 12'500;
    Picoseconds period = 12'500;
    std::uint64_t n_pulses = 0;
    std::vector<Photon> photons;

    [[nodiscard]] std::uint64_t nominal_pulse_time(std::uint64_t pulse) const noexcept {
        return static_cast<std::uint64_t>(first_pulse_time) +
               pulse * static_cast<std::uint64_t>(period);
    }

    /// Exclusive upper bound of the simulated timeline.
    [[nodiscard]] std::uint64_t span_end() const noexcept {
        return nominal_pulse_time(n_pulses) + static_cast<std::uint64_t>(period);
    }
};

struct CascadeEmission {
    LaserClock clock;
    std::uint64_t n_pulses = 0;
    PhotonStream xx;
    PhotonStream x;
    /// Per-pulse laser jitter; empty when the clock has no jitter.
    std::vector<float> pulse_offsets;
};

struct SimulationOptions {
    std::uint64_t chunk_pulses = 1u << 16;
    unsigned threads = 1;
};

/// Draws cascade photons for n_pulses laser pulses. Per pulse k: with
/// probability p_exc, t_XX = t_k + Exp(tau_xx) and t_X = t_XX + Exp(tau_x);
/// independently per line, with probability p_multi one extra photon at
/// t_k + Exp(tau of that line).
CascadeEmission emit_cascade(EmitterModel const &emitter, LaserClock const &clock,
                             std::uint64_t n_pulses, std::uint64_t seed,
                             SimulationOptions const &options = {});

/// Pulsed coherent light: Poisson(mean_photons) photons per pulse, each
/// delayed by Exp(tau).
PhotonStream emit_coherent(LaserClock const &clock, double mean_photons,
                           double tau, std::uint64_t n_pulses,
                           std::uint64_t seed,
                           SimulationOptions const &options = {});

/// Detector response: efficiency thinning, Gaussian jitter, Poisson
/// background over the stream's timeline, then non-paralyzable dead time.
/// `stream_id` separates the random streams of different detectors.
TagStream detect(PhotonStream const &photons, DetectorModel const &detector,
                 double background_rate, std::uint16_t channel,
                 std::uint64_t seed, std::uint64_t stream_id,
                 SimulationOptions const &options = {});

/// One tag per laser pulse as seen by the sync detector.
TagStream sync_tags(CascadeEmission const &emission,
                    DetectorModel const &detector, std::uint16_t channel,
                    std::uint64_t seed, SimulationOptions const &options = {});

struct ChannelMap {
    std::uint16_t sync = 0;
    std::uint16_t xx = 1;
    std::uint16_t x = 2;
};

struct CascadeDetectors {
    DetectorModel xx;
    DetectorModel x;
    DetectorModel sync;
};

struct CascadeTags {
    TagStream xx;
    TagStream x;
    TagStream sync;
};

/// Full cascade run: emission followed by detection on the XX, X and sync
/// channels. Deterministic for fixed (inputs, seed, chunk size); the thread
/// count never changes the output.
CascadeTags simulate_cascade(EmitterModel const &emitter,
                             LaserClock const &clock,
                             CascadeDetectors const &detectors,
                             std::uint64_t n_pulses, std::uint64_t seed,
                             SimulationOptions const &options = {},
                             ChannelMap const &channels = {});

/// Instrument response: delays of zero-lifetime signal tags relative to
/// sync tags. Throws EmptyInputError for empty streams.
CoincidenceHistogram irf_from_sync(std::span<TimeTag const> sync,
                                   std::span<TimeTag const> signal,
                                   Picoseconds bin_width = 1,
                                   Picoseconds window = 2'000);

/// Expected HBT g2(0) of one line for this emitter with background ignored:
/// 2 p_exc p_multi / (p_exc + p_multi)^2.
double expected_g2(EmitterModel const &emitter) noexcept;

/// Smallest p_multi whose expected_g2 equals target_g2 (0 <= target < 0.5).
double p_multi_for_g2(double target_g2, double p_exc);

} // namespace qdcascade
