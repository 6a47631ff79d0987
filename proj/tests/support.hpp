#pragma once

// Reference implementations used as test oracles. They are deliberately
// naive and share no code with the library.

#include "qdcascade/timetag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

/// Scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(std::string const &tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("qdcascade-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(TempDir const &) = delete;
    TempDir &operator=(TempDir const &) = delete;
    [[nodiscard]] std::filesystem::path const &path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(std::string const &name) const {
        return path_ / name;
    }

  private:
    std::filesystem::path path_;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    auto q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

/// All-pairs histogram: bin i spans [c_i - floor(bw/2), c_i - floor(bw/2) + bw)
/// with c_i = -window + i bw; only |dt| <= window counts.
inline std::vector<std::uint64_t> brute_force_histogram(
    std::vector<qdcascade::TimeTag> const &a, std::vector<qdcascade::TimeTag> const &b,
    std::int64_t bin_width, std::int64_t window) {
    std::size_t const n = static_cast<std::size_t>(2 * (window / bin_width) + 1);
    std::vector<std::uint64_t> counts(n, 0);
    std::int64_t const lower0 = -window - bin_width / 2;
    for (auto const &ta : a) {
        for (auto const &tb : b) {
            auto const dt = static_cast<std::int64_t>(tb.time) - static_cast<std::int64_t>(ta.time);
            if (dt < -window || dt > window)
                continue;
            auto const i = floor_div(dt - lower0, bin_width);
            if (i >= 0 && i < static_cast<std::int64_t>(n))
                ++counts[static_cast<std::size_t>(i)];
        }
    }
    return counts;
}

/// Kolmogorov-Smirnov distance of a sample against Exp(tau).
inline double ks_exponential(std::vector<double> x, double tau) {
    std::sort(x.begin(), x.end());
    double d = 0.0;
    double const n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double const f = 1.0 - std::exp(-x[i] / tau);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

/// Expected normalized coincidence areas of an unbalanced Mach-Zehnder fed
/// with one photon per pulse, delay equal to the pulse period.
///
/// Each photon independently takes arm a in {short, long} and leaves through
/// port q in {1, 2}, 16 equally likely (a1, q1, a2, q2) paths per photon pair.
/// A coincidence at k periods needs q1 != q2 and arrival slots differing by k.
/// Two photons from adjacent pulses that meet in the same slot through
/// opposite arms interfere: their chance to split is reduced by (1 - M).
/// Areas are normalized to the value for well separated pulses.
inline std::map<int, double> hom_path_oracle(double overlap_m, int k_max = 3) {
    std::map<int, double> area;
    for (int k = -k_max; k <= k_max; ++k) {
        double sum = 0.0;
        for (int dp = -k_max - 2; dp <= k_max + 2; ++dp) {
            if (dp == 0)
                continue;  // one photon per pulse
            for (int a1 = 0; a1 < 2; ++a1)
                for (int q1 = 0; q1 < 2; ++q1)
                    for (int a2 = 0; a2 < 2; ++a2)
                        for (int q2 = 0; q2 < 2; ++q2) {
                            // photon 1 at detector 1, photon 2 at detector 2
                            if (q1 != 0 || q2 != 1)
                                continue;
                            if (dp + a2 - a1 != k)
                                continue;
                            bool const meet = (dp + a2 - a1 == 0) && a1 != a2;
                            sum += (1.0 / 16.0) * (meet ? (1.0 - overlap_m) : 1.0);
                        }
        }
        area[k] = sum / 0.25;
    }
    return area;
}

} // namespace testsupport
