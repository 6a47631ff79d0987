#include "qdcascade/timetag.hpp"

#include "qdcascade/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace qdcascade {

std::size_t first_unsorted_index(std::span<TimeTag const> tags) noexcept {
    for (std::size_t i = 1; i < tags.size(); ++i) {
        if (tags[i].time < tags[i - 1].time)
            return i;
    }
    return tags.size();
}

void sort_by_time(TagStream &tags) {
    std::stable_sort(tags.begin(), tags.end(),
                     [](TimeTag const &a, TimeTag const &b) {
                         return a.time < b.time;
                     });
}

std::pair<Picoseconds, Picoseconds>
CoincidenceHistogram::range() const noexcept {
    if (counts.empty())
        return {center_offset, center_offset};
    return {bin_lower_edge(0), bin_lower_edge(counts.size() - 1) + bin_width};
}

void CoincidenceHistogram::recount() noexcept {
    total_pairs = std::accumulate(counts.begin(), counts.end(),
                                  std::uint64_t{0});
}

std::uint64_t histogram_counts(CoincidenceHistogram const &hist,
                               Picoseconds lo, Picoseconds hi) {
    if (lo > hi)
        throw RangeError("histogram window has lo > hi");
    if (lo == hi)
        return 0;
    auto const [range_lo, range_hi] = hist.range();
    if (lo < range_lo || hi > range_hi) {
        throw RangeError("histogram window [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + ") outside range [" +
                         std::to_string(range_lo) + ", " +
                         std::to_string(range_hi) + ")");
    }
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        auto const c = hist.bin_center(i);
        if (c >= lo && c < hi)
            sum += hist.counts[i];
    }
    return sum;
}

} // namespace qdcascade
