#include "qdcascade/interferometer.hpp"

#include "qdcascade/errors.hpp"
#include "qdcascade/rng.hpp"
#include "qdcascade/units.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qdcascade {

namespace {

constexpr std::size_t route_chunk = 1u << 16;

PhotonStream empty_like(PhotonStream const &src) {
    PhotonStream out;
    out.line = src.line;
    out.tau = src.tau;
    out.first_pulse_time = src.first_pulse_time;
    out.period = src.period;
    out.n_pulses = src.n_pulses;
    return out;
}

} // namespace

void HomBench::validate() const {
    if (delay <= 0)
        throw ContractError("HOM delay must be positive");
    if (!(nu >= 0.0 && nu <= 1.0))
        throw ContractError("classical visibility nu must lie in [0, 1]");
    if (!(split_first >= 0.0 && split_first <= 1.0))
        throw ContractError("HOM split must lie in [0, 1]");
    auto [ts, tl] = arm_transmissions;
    if (!(ts >= 0.0 && ts <= 1.0 && tl >= 0.0 && tl <= 1.0) || ts + tl <= 0.0)
        throw ContractError("arm transmissions must lie in [0, 1] and not both vanish");
}

double HomBench::effective_long_probability() const noexcept {
    auto const [ts, tl] = arm_transmissions;
    if (!equalize_arms || ts == tl)
        return split_first;
    return ts / (ts + tl);
}

double packet_overlap(WavePacket const &a, WavePacket const &b) {
    if (!(a.tau > 0.0) || !(b.tau > 0.0))
        throw ContractError("wave packet tau must be positive");
    double const tau = 0.5 * (a.tau + b.tau);
    return std::exp(-std::abs(a.start - b.start) / tau);
}

std::pair<TagStream, TagStream> hbt_route(std::span<TimeTag const> tags,
                                          std::uint64_t seed,
                                          std::uint16_t channel_1,
                                          std::uint16_t channel_2) {
    std::pair<TagStream, TagStream> out;
    out.first.reserve(tags.size() / 2 + 16);
    out.second.reserve(tags.size() / 2 + 16);
    Engine rng;
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (i % route_chunk == 0)
            rng = substream(seed, streams::hbt, i / route_chunk);
        auto tag = tags[i];
        if (coin(rng)) {
            tag.channel = channel_2;
            out.second.push_back(tag);
        } else {
            tag.channel = channel_1;
            out.first.push_back(tag);
        }
    }
    return out;
}

std::pair<PhotonStream, PhotonStream> hbt_route(PhotonStream const &photons,
                                                std::uint64_t seed) {
    std::pair<PhotonStream, PhotonStream> out{empty_like(photons), empty_like(photons)};
    auto const &src = photons.photons;
    Engine rng;
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (i % route_chunk == 0)
            rng = substream(seed, streams::hbt, i / route_chunk);
        auto p = src[i];
        if (coin(rng)) {
            p.route = route_port2;
            out.second.photons.push_back(p);
        } else {
            p.route = 0;
            out.first.photons.push_back(p);
        }
    }
    return out;
}

std::pair<PhotonStream, PhotonStream> hom_route(PhotonStream const &photons,
                                                HomBench const &bench,
                                                std::uint64_t seed) {
    bench.validate();
    if (!(photons.tau > 0.0) || photons.period <= 0)
        throw ContractError("hom_route: photon stream lacks wave-packet metadata");

    auto const &src = photons.photons;
    for (std::size_t i = 1; i < src.size(); ++i) {
        if (src[i].pulse < src[i - 1].pulse)
            throw ContractError("hom_route: photons not ordered by pulse at index " +
                                std::to_string(i));
    }

    constexpr std::uint8_t lost = 0xFF;
    double const p_long = bench.effective_long_probability();
    auto const [t_short, t_long] = bench.arm_transmissions;

    // Arm choice and loss, per photon.
    std::vector<std::uint8_t> arm(src.size());
    {
        Engine rng;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (i % route_chunk == 0)
                rng = substream(seed, streams::hom, i / route_chunk);
            std::uint8_t const a = u(rng) < p_long ? 1 : 0;
            double const t = a ? t_long : t_short;
            arm[i] = (t >= 1.0 || u(rng) < t) ? a : lost;
        }
    }

    // Arrival slot of each photon, in units of the laser period. A delay
    // that is not a multiple of the period still shifts arrival times, but
    // long-arm photons then share no slot with short-arm photons.
    auto const period = photons.period;
    bool const slot_aligned = bench.delay % period == 0;
    auto const delay_slots = static_cast<std::uint64_t>(bench.delay / period);
    auto slot_of = [&](std::size_t i) {
        return src[i].pulse + (arm[i] == 1 ? (slot_aligned ? delay_slots : 0) : 0);
    };

    // Merge the short-arm and long-arm sequences (each sorted by slot).
    std::vector<std::uint32_t> order;
    order.reserve(src.size());
    {
        std::vector<std::uint32_t> shorts, longs;
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (arm[i] == 0)
                shorts.push_back(static_cast<std::uint32_t>(i));
            else if (arm[i] == 1)
                longs.push_back(static_cast<std::uint32_t>(i));
        }
        std::merge(shorts.begin(), shorts.end(), longs.begin(), longs.end(),
                   std::back_inserter(order),
                   [&](std::uint32_t a, std::uint32_t b) {
                       auto const sa = slot_of(a);
                       auto const sb = slot_of(b);
                       return sa != sb ? sa < sb : a < b;
                   });
    }

    auto absolute_start = [&](std::size_t i) {
        // Relative to pulse 0 nominal time; pulse differences stay exact.
        auto const &p = src[i];
        double t = static_cast<double>(p.pulse) * static_cast<double>(period) +
                   p.pulse_offset + p.packet_start;
        if (arm[i] == 1)
            t += static_cast<double>(bench.delay);
        return t;
    };

    std::vector<std::uint8_t> port(src.size(), 0);
    {
        Engine rng;
        std::uint64_t rng_chunk = ~std::uint64_t{0};
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::bernoulli_distribution coin(0.5);
        bool const co = bench.polarization == Polarization::co;
        double const nu2 = bench.nu * bench.nu;
        std::size_t g = 0;
        while (g < order.size()) {
            auto const slot = slot_of(order[g]);
            std::size_t e = g + 1;
            while (e < order.size() && slot_of(order[e]) == slot)
                ++e;
            if (slot / route_chunk != rng_chunk) {
                rng_chunk = slot / route_chunk;
                rng = substream(seed, streams::hom_ports, rng_chunk);
            }
            bool interfered = false;
            if (e - g == 2 && slot_aligned && arm[order[g]] != arm[order[g + 1]]) {
                double m = 0.0;
                if (co) {
                    WavePacket const a{absolute_start(order[g]), photons.tau};
                    WavePacket const b{absolute_start(order[g + 1]), photons.tau};
                    m = nu2 * packet_overlap(a, b);
                }
                if (u(rng) < m) {
                    std::uint8_t const p = coin(rng) ? 1 : 0;
                    port[order[g]] = p;
                    port[order[g + 1]] = p;
                    interfered = true;
                }
            }
            if (!interfered) {
                for (auto k = g; k < e; ++k)
                    port[order[k]] = coin(rng) ? 1 : 0;
            }
            g = e;
        }
    }

    std::pair<PhotonStream, PhotonStream> out{empty_like(photons), empty_like(photons)};
    out.first.photons.reserve(order.size() / 2 + 16);
    out.second.photons.reserve(order.size() / 2 + 16);
    auto const delay = static_cast<float>(bench.delay);
    for (auto i : order) {
        auto p = src[i];
        p.route = static_cast<std::uint8_t>((port[i] ? route_port2 : 0) |
                                            (arm[i] == 1 ? route_long_arm : 0));
        if (arm[i] == 1)
            p.emission += delay;
        (port[i] ? out.second : out.first).photons.push_back(p);
    }
    return out;
}

void LineShape::validate() const {
    if (!(f_lorentz >= 0.0) || !(f_gauss >= 0.0) || (f_lorentz == 0.0 && f_gauss == 0.0))
        throw ContractError("line shape widths must be non-negative and not both zero");
}

double LineShape::wavelength_nm() const {
    if (!(center > 0.0))
        throw ContractError("line center energy must be positive (zero wavelength)");
    return units::wavelength_nm_from_ev(center);
}

double lorentzian_envelope(double f_lorentz_uev, double delay_ps) {
    double const dnu = units::uev_to_per_ps(f_lorentz_uev);
    return std::exp(-std::numbers::pi * dnu * std::abs(delay_ps));
}

double gaussian_envelope(double f_gauss_uev, double delay_ps) {
    double const dnu = units::uev_to_per_ps(f_gauss_uev);
    double const a = std::numbers::pi * dnu * delay_ps;
    return std::exp(-a * a / (4.0 * std::numbers::ln2));
}

double coherence_envelope(LineShape const &line, double delay_ps) {
    return lorentzian_envelope(line.f_lorentz, delay_ps) *
           gaussian_envelope(line.f_gauss, delay_ps);
}

double retroreflector_delay_ps(double displacement_mm) {
    return 2.0 * displacement_mm / units::speed_of_light_mm_per_ps;
}

std::vector<FringeDataset> michelson_scan(LineShape const &line,
                                          MichelsonScan const &scan,
                                          std::uint64_t seed) {
    line.validate();
    double const lambda = line.wavelength_nm();
    if (!(scan.piezo_step_nm > 0.0))
        throw ContractError("piezo step must be positive");
    if (!(scan.noise >= 0.0))
        throw ContractError("noise must be non-negative");

    std::vector<FringeDataset> out;
    out.reserve(scan.coarse_positions_mm.size());
    for (std::size_t c = 0; c < scan.coarse_positions_mm.size(); ++c) {
        auto rng = substream(seed, streams::michelson, c);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::normal_distribution<double> noise(0.0, scan.noise * scan.intensity);

        FringeDataset d;
        d.coarse_mm = scan.coarse_positions_mm[c];
        d.delay_ps = retroreflector_delay_ps(d.coarse_mm);
        d.wavelength_nm = lambda;
        d.visibility = coherence_envelope(line, d.delay_ps);
        d.phase = phase(rng);
        d.samples.reserve(scan.steps);
        for (std::size_t j = 0; j < scan.steps; ++j) {
            double const x = static_cast<double>(j) * scan.piezo_step_nm;
            double intensity =
                scan.intensity *
                (1.0 + d.visibility * std::cos(4.0 * std::numbers::pi * x / lambda + d.phase));
            if (scan.noise > 0.0)
                intensity += noise(rng);
            d.samples.push_back({x, intensity});
        }
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace qdcascade
