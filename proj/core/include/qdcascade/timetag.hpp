#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace qdcascade {

using Picoseconds = std::int64_t;

/// One detector click. Time is integer picoseconds since acquisition start.
struct TimeTag {
    std::uint64_t time = 0;
    std::uint16_t channel = 0;
    std::uint16_t flags = 0;

    friend bool operator==(TimeTag const &, TimeTag const &) = default;
};

using TagStream = std::vector<TimeTag>;

/// Index of the first tag whose time is smaller than its predecessor, or
/// tags.size() if the stream is sorted.
std::size_t first_unsorted_index(std::span<TimeTag const> tags) noexcept;

inline bool is_time_sorted(std::span<TimeTag const> tags) noexcept {
    return first_unsorted_index(tags) == tags.size();
}

/// Stable sort by time.
void sort_by_time(TagStream &tags);

/// Binned delays between two channels.
///
/// Bin i is centered at center_offset + i * bin_width and covers
/// [center - bin_width / 2, center - bin_width / 2 + bin_width) with
/// integer halving, so bin edges are half-open and tie-breaking is fixed.
struct CoincidenceHistogram {
    Picoseconds bin_width = 1;
    Picoseconds center_offset = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total_pairs = 0;

    [[nodiscard]] std::size_t size() const noexcept { return counts.size(); }

    [[nodiscard]] Picoseconds bin_center(std::size_t i) const noexcept {
        return center_offset + static_cast<Picoseconds>(i) * bin_width;
    }

    [[nodiscard]] Picoseconds bin_lower_edge(std::size_t i) const noexcept {
        return bin_center(i) - bin_width / 2;
    }

    /// Half-open [lo, hi) span covered by all bins.
    [[nodiscard]] std::pair<Picoseconds, Picoseconds> range() const noexcept;

    /// Recomputes total_pairs from counts.
    void recount() noexcept;
};

/// Sum of counts whose bin centers fall in [lo, hi).
///
/// Throws RangeError if lo > hi or the window extends beyond range().
std::uint64_t histogram_counts(CoincidenceHistogram const &hist,
                               Picoseconds lo, Picoseconds hi);

struct PeakArea {
    double area = 0.0;
    double error = 0.0;
};

/// Integrated coincidence peaks at delays k * period.
struct PeakAreas {
    Picoseconds period = 12'500;
    Picoseconds half_width = 3'125;
    std::map<int, PeakArea> areas;

    [[nodiscard]] bool contains(int k) const { return areas.contains(k); }
    [[nodiscard]] PeakArea const &at(int k) const { return areas.at(k); }
};

} // namespace qdcascade
