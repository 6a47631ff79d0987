#pragma once

// Event-based HBT, Hong-Ou-Mandel (unbalanced Mach-Zehnder) and Michelson
// experiments.

#include "qdcascade/emitter.hpp"
#include "qdcascade/timetag.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qdcascade {

enum class Polarization : std::uint8_t { co, cross };

struct HomBench {
    Picoseconds delay = 12'500;
    /// Probability that a photon takes the long (delayed) arm.
    double split_first = 0.5;
    /// Classical interference visibility of the output coupler.
    double nu = 1.0;
    Polarization polarization = Polarization::co;
    /// Transmissions of the short and long arm.
    std::pair<double, double> arm_transmissions{1.0, 1.0};
    /// Rebalance the input split so that both arms deliver equal intensity
    /// (overrides split_first when the transmissions differ).
    bool equalize_arms = true;

    void validate() const;
    /// Long-arm probability actually used for routing.
    [[nodiscard]] double effective_long_probability() const noexcept;
};

/// Exponentially decaying single-photon wave packet.
struct WavePacket {
    double start = 0.0;
    double tau = 1.0;
};

/// |<phi1|phi2>|^2 for two equal-tau exponential packets.
double packet_overlap(WavePacket const &a, WavePacket const &b);

// Route bits stored in Photon::route and TimeTag::flags.
inline constexpr std::uint8_t route_port2 = 0x1;
inline constexpr std::uint8_t route_long_arm = 0x2;

/// 50:50 splitter in front of two detectors: each tag goes to output 1 or 2
/// with probability 1/2. Output tags are relabelled to channel_1 / channel_2.
std::pair<TagStream, TagStream> hbt_route(std::span<TimeTag const> tags,
                                          std::uint64_t seed,
                                          std::uint16_t channel_1 = 1,
                                          std::uint16_t channel_2 = 2);

/// Photon-level variant, for detection after the splitter.
std::pair<PhotonStream, PhotonStream> hbt_route(PhotonStream const &photons,
                                                std::uint64_t seed);

/// Unbalanced Mach-Zehnder HOM interferometer.
///
/// Each photon takes the long arm with the bench's long-arm probability and
/// survives its arm with that arm's transmission. At the output coupler a
/// pulse slot holding exactly one short-arm and one long-arm photon
/// interferes: with probability M = nu^2 |<phi1|phi2>|^2 (co) or 0 (cross)
/// both leave through the same random port; otherwise, and for all other
/// photons, ports are chosen independently with probability 1/2.
std::pair<PhotonStream, PhotonStream> hom_route(PhotonStream const &photons,
                                                HomBench const &bench,
                                                std::uint64_t seed);

struct LineShape {
    double f_lorentz = 0.0;  ///< Lorentzian FWHM, ueV
    double f_gauss = 0.0;    ///< Gaussian FWHM, ueV
    double center = 1.59;    ///< eV

    void validate() const;
    [[nodiscard]] double wavelength_nm() const;
};

/// Fringe visibility of a Voigt line at relative delay tau (ps): the
/// product of the Lorentzian and Gaussian envelopes.
double coherence_envelope(LineShape const &line, double delay_ps);
double lorentzian_envelope(double f_lorentz_uev, double delay_ps);
double gaussian_envelope(double f_gauss_uev, double delay_ps);

/// Delay introduced by moving a retroreflector by `displacement_mm`
/// (the path difference is twice the displacement).
double retroreflector_delay_ps(double displacement_mm);

struct MichelsonScan {
    std::vector<double> coarse_positions_mm;
    double piezo_step_nm = 20.0;
    std::size_t steps = 100;
    double intensity = 1000.0;
    /// Gaussian intensity noise, as a fraction of `intensity`.
    double noise = 0.0;
};

struct FringeSample {
    double position_nm = 0.0;
    double intensity = 0.0;
};

struct FringeDataset {
    double coarse_mm = 0.0;
    double delay_ps = 0.0;
    double wavelength_nm = 0.0;
    double visibility = 0.0;  ///< envelope value used to generate the data
    double phase = 0.0;
    std::vector<FringeSample> samples;
};

/// I(x) = I0 (1 + v(tau_d) cos(4 pi x / lambda + phi0)) + noise for every
/// coarse delay; phi0 is drawn per dataset.
std::vector<FringeDataset> michelson_scan(LineShape const &line,
                                          MichelsonScan const &scan,
                                          std::uint64_t seed);

} // namespace qdcascade
