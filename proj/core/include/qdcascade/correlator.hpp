#pragma once

#include "qdcascade/measured.hpp"
#include "qdcascade/timetag.hpp"

#include <cstdint>
#include <span>

namespace qdcascade {

/// Histogram geometry for a two-channel correlation. Delays are
/// t_b - t_a; pairs with |t_b - t_a| <= window are counted.
struct CorrelationRequest {
    Picoseconds bin_width = 1;
    Picoseconds window = 0;
    std::uint16_t channel_a = 0;
    std::uint16_t channel_b = 1;

    void validate() const;
    /// Number of bins, always odd so that delay 0 is a bin center.
    [[nodiscard]] std::size_t bin_count() const noexcept {
        return static_cast<std::size_t>(2 * (window / bin_width) + 1);
    }
};

struct CorrelateOptions {
    unsigned threads = 1;
    /// Tags of stream a per work item; part of the result's definition only
    /// through summation order, which is exact for integer counts.
    std::size_t chunk = 1u << 18;
};

/// Empty histogram with the request's geometry.
CoincidenceHistogram make_histogram(CorrelationRequest const &request);

/// Coincidence histogram of all pairs (a_i, b_j) with |t_b - t_a| <= window.
/// Both streams must be sorted; ContractError names the first offending
/// index otherwise. Sliding two-pointer scan, O(N k).
CoincidenceHistogram correlate(std::span<TimeTag const> a,
                               std::span<TimeTag const> b,
                               CorrelationRequest const &request,
                               CorrelateOptions const &options = {});

/// Correlates channel_a against channel_b of one merged, sorted stream.
CoincidenceHistogram correlate_channels(std::span<TimeTag const> merged,
                                        CorrelationRequest const &request,
                                        CorrelateOptions const &options = {});

/// Peak areas at delays k * period: sum of counts in bins whose centers lie
/// within +-half_width of k * period, for every k whose full window fits in
/// the histogram range. Poisson error sqrt(area).
PeakAreas integrate_peaks(CoincidenceHistogram const &hist, Picoseconds period,
                          Picoseconds half_width);

inline PeakAreas integrate_peaks(CoincidenceHistogram const &hist,
                                 Picoseconds period) {
    return integrate_peaks(hist, period, period / 4);
}

/// Center peak area over the mean side-peak area for |k| >=
/// exclusion_min_periods. Needs at least four qualifying side peaks.
Measured normalize_center(PeakAreas const &peaks, int exclusion_min_periods = 2);

/// g2(0): center peak over the mean of the five nearest side peaks on each
/// side (k = +-1 ... +-5).
Measured g2_from_peaks(PeakAreas const &peaks);

} // namespace qdcascade
