#include "qdcascade/correlator.hpp"

#include "qdcascade/errors.hpp"
#include "qdcascade/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace qdcascade {

namespace {

void require_sorted(std::span<TimeTag const> tags, char const *name) {
    auto const bad = first_unsorted_index(tags);
    if (bad != tags.size()) {
        throw ContractError(std::string("correlate: stream ") + name +
                            " not sorted at index " + std::to_string(bad));
    }
}

void correlate_range(std::span<TimeTag const> a, std::span<TimeTag const> b,
                     CorrelationRequest const &request,
                     std::vector<std::uint64_t> &counts) {
    auto const window = static_cast<std::uint64_t>(request.window);
    auto const shift = request.window + request.bin_width / 2;
    auto const width = request.bin_width;

    auto lo = std::lower_bound(b.begin(), b.end(),
                               a.empty() ? 0 : a.front().time - std::min(a.front().time, window),
                               [](TimeTag const &t, std::uint64_t v) { return t.time < v; });
    std::size_t j = static_cast<std::size_t>(lo - b.begin());
    auto *const out = counts.data();
    for (auto const &tag : a) {
        auto const t = tag.time;
        auto const floor_time = t - std::min(t, window);
        while (j < b.size() && b[j].time < floor_time)
            ++j;
        auto const ceiling = t + window;
        for (auto k = j; k < b.size() && b[k].time <= ceiling; ++k) {
            auto const delay = static_cast<Picoseconds>(b[k].time - t);
            ++out[static_cast<std::size_t>((delay + shift) / width)];
        }
    }
}

} // namespace

void CorrelationRequest::validate() const {
    if (bin_width < 1)
        throw ContractError("correlation bin width must be >= 1 ps");
    if (window < 0 || window % bin_width != 0)
        throw ContractError("correlation window must be a non-negative multiple of the bin width");
}

CoincidenceHistogram make_histogram(CorrelationRequest const &request) {
    request.validate();
    CoincidenceHistogram hist;
    hist.bin_width = request.bin_width;
    hist.center_offset = -request.window;
    hist.counts.assign(request.bin_count(), 0);
    return hist;
}

CoincidenceHistogram correlate(std::span<TimeTag const> a,
                               std::span<TimeTag const> b,
                               CorrelationRequest const &request,
                               CorrelateOptions const &options) {
    require_sorted(a, "a");
    require_sorted(b, "b");
    auto hist = make_histogram(request);
    auto const chunk = std::max<std::size_t>(1, options.chunk);
    auto const n_chunks = (a.size() + chunk - 1) / chunk;
    if (n_chunks <= 1 || options.threads <= 1) {
        correlate_range(a, b, request, hist.counts);
    } else {
        std::vector<std::vector<std::uint64_t>> partial(
            n_chunks, std::vector<std::uint64_t>(hist.size(), 0));
        parallel_for(n_chunks, options.threads, [&](std::size_t c) {
            auto const begin = c * chunk;
            auto const n = std::min(chunk, a.size() - begin);
            correlate_range(a.subspan(begin, n), b, request, partial[c]);
        });
        for (auto const &p : partial)
            for (std::size_t i = 0; i < p.size(); ++i)
                hist.counts[i] += p[i];
    }
    hist.recount();
    return hist;
}

CoincidenceHistogram correlate_channels(std::span<TimeTag const> merged,
                                        CorrelationRequest const &request,
                                        CorrelateOptions const &options) {
    TagStream a, b;
    for (auto const &t : merged) {
        if (t.channel == request.channel_a)
            a.push_back(t);
        if (t.channel == request.channel_b)
            b.push_back(t);
    }
    return correlate(a, b, request, options);
}

PeakAreas integrate_peaks(CoincidenceHistogram const &hist, Picoseconds period,
                          Picoseconds half_width) {
    if (period <= 0 || half_width < 0)
        throw ContractError("integrate_peaks: period must be positive, half width non-negative");
    if (2 * half_width >= period)
        throw ContractError("integrate_peaks: peak windows overlap (2 * half_width >= period)");

    PeakAreas peaks;
    peaks.period = period;
    peaks.half_width = half_width;
    if (hist.counts.empty())
        return peaks;

    auto const [range_lo, range_hi] = hist.range();
    auto floor_div = [](Picoseconds x, Picoseconds d) {
        return x >= 0 ? x / d : -((-x + d - 1) / d);
    };
    // Window [kP - hw, kP + hw] must lie in [range_lo, range_hi).
    auto const k_min = -floor_div(-(range_lo + half_width), period);
    auto const k_max = floor_div(range_hi - 1 - half_width, period);
    for (auto k = k_min; k <= k_max; ++k) {
        auto const center = k * period;
        double area = 0.0;
        // Bins with |c - center| <= hw.
        auto const first = std::max<Picoseconds>(
            0, -floor_div(-(center - half_width - hist.center_offset), hist.bin_width));
        for (auto i = first; i < static_cast<Picoseconds>(hist.size()); ++i) {
            auto const c = hist.bin_center(static_cast<std::size_t>(i));
            if (c > center + half_width)
                break;
            area += static_cast<double>(hist.counts[static_cast<std::size_t>(i)]);
        }
        peaks.areas[static_cast<int>(k)] = {area, std::sqrt(area)};
    }
    return peaks;
}

namespace {

Measured center_over_mean(PeakAreas const &peaks, double side_sum, int n_side) {
    auto const &center = peaks.at(0);
    double const mean = side_sum / n_side;
    if (mean <= 0.0)
        throw FitError("side peaks are empty; cannot normalize");
    double const value = center.area / mean;
    // Poisson: var(A0) = A0, var(mean) = sum / n^2.
    double const err = std::sqrt(center.area / (mean * mean) +
                                 value * value / side_sum);
    return {value, err};
}

} // namespace

Measured normalize_center(PeakAreas const &peaks, int exclusion_min_periods) {
    if (!peaks.contains(0))
        throw ContractError("normalize_center: no center peak");
    double sum = 0.0;
    int n = 0;
    for (auto const &[k, a] : peaks.areas) {
        if (std::abs(k) >= exclusion_min_periods) {
            sum += a.area;
            ++n;
        }
    }
    if (n < 4) {
        throw ContractError("normalize_center: need >= 4 side peaks with |k| >= " +
                            std::to_string(exclusion_min_periods) + ", have " +
                            std::to_string(n));
    }
    return center_over_mean(peaks, sum, n);
}

Measured g2_from_peaks(PeakAreas const &peaks) {
    if (!peaks.contains(0))
        throw ContractError("g2_from_peaks: no center peak");
    double sum = 0.0;
    for (int k = 1; k <= 5; ++k) {
        if (!peaks.contains(k) || !peaks.contains(-k))
            throw ContractError("g2_from_peaks: need 5 side peaks on each side");
        sum += peaks.at(k).area + peaks.at(-k).area;
    }
    return center_over_mean(peaks, sum, 10);
}

} // namespace qdcascade
