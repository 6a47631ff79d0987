#pragma once

#include <cmath>

namespace qdcascade {

/// A value with its 1-sigma uncertainty.
struct Measured {
    double value = 0.0;
    double error = 0.0;
};

/// a / b with uncorrelated first-order error propagation.
inline Measured ratio(Measured a, Measured b) {
    double const r = a.value / b.value;
    double const rel_a = a.value != 0.0 ? a.error / a.value : 0.0;
    double const rel_b = b.error / b.value;
    double err = std::abs(r) * std::hypot(rel_a, rel_b);
    if (a.value == 0.0)
        err = a.error / std::abs(b.value);
    return {r, err};
}

inline Measured sum(Measured a, Measured b) {
    return {a.value + b.value, std::hypot(a.error, b.error)};
}

} // namespace qdcascade
