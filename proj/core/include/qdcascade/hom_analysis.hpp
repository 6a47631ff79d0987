#pragma once

#include "qdcascade/measured.hpp"

namespace qdcascade {

/// Raw HOM visibility 1 - a_co / a_cross from normalized center areas.
/// Throws ContractError unless a_cross > 0.
Measured hom_visibility(Measured a_co, Measured a_cross);

/// v_raw (1 + 2 g2) / nu^2. Requires nu in (0, 1] and g2 >= 0.
double hom_corrected(double v_raw, double g2, double nu);

/// As above with first-order propagation of the v_raw and g2 errors.
Measured hom_corrected(Measured v_raw, Measured g2, double nu);

struct VisibilityRecord {
    Measured v_raw;
    Measured v_corr;
    Measured g2;
    double nu = 1.0;
    Measured a_co;
    Measured a_cross;
};

VisibilityRecord make_visibility_record(Measured a_co, Measured a_cross,
                                        Measured g2, double nu);

} // namespace qdcascade
