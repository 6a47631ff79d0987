#include "qdcascade/hom_analysis.hpp"

#include "qdcascade/errors.hpp"

#include <cmath>

namespace qdcascade {

namespace {

void check_correction_inputs(double g2, double nu) {
    if (!(nu > 0.0 && nu <= 1.0))
        throw ContractError("classical visibility nu must lie in (0, 1]");
    if (!(g2 >= 0.0))
        throw ContractError("g2 must be non-negative");
}

} // namespace

Measured hom_visibility(Measured a_co, Measured a_cross) {
    if (!(a_cross.value > 0.0))
        throw ContractError("hom_visibility: a_cross must be positive");
    auto const q = ratio(a_co, a_cross);
    return {1.0 - q.value, q.error};
}

double hom_corrected(double v_raw, double g2, double nu) {
    check_correction_inputs(g2, nu);
    return v_raw * (1.0 + 2.0 * g2) / (nu * nu);
}

Measured hom_corrected(Measured v_raw, Measured g2, double nu) {
    check_correction_inputs(g2.value, nu);
    double const nu2 = nu * nu;
    double const value = v_raw.value * (1.0 + 2.0 * g2.value) / nu2;
    double const dv = (1.0 + 2.0 * g2.value) / nu2 * v_raw.error;
    double const dg = 2.0 * v_raw.value / nu2 * g2.error;
    return {value, std::hypot(dv, dg)};
}

VisibilityRecord make_visibility_record(Measured a_co, Measured a_cross,
                                        Measured g2, double nu) {
    VisibilityRecord rec;
    rec.a_co = a_co;
    rec.a_cross = a_cross;
    rec.g2 = g2;
    rec.nu = nu;
    rec.v_raw = hom_visibility(a_co, a_cross);
    rec.v_corr = hom_corrected(rec.v_raw, g2, nu);
    return rec;
}

} // namespace qdcascade
