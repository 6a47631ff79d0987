#include "qdcascade/field_models.hpp"

#include "qdcascade/errors.hpp"
#include "qdcascade/units.hpp"

#include <cmath>

namespace qdcascade {

void DiodeGeometry::validate() const {
    if (!(thickness > 0.0))
        throw ContractError("diode thickness D must be positive");
}

double capacitor_field(double voltage, DiodeGeometry const &geom) {
    geom.validate();
    return (geom.vb - voltage) / geom.thickness;
}

double voltage_for_field(double field, DiodeGeometry const &geom) {
    geom.validate();
    return geom.vb - field * geom.thickness;
}

void TrapFieldModel::validate() const {
    if (!(delta0 > 0.0) || !(d > 0.0))
        throw ContractError("trap geometry delta0 and d must be positive");
    if (!(epsilon_r > 0.0))
        throw ContractError("epsilon_r must be positive");
    if (!(m_hh > 0.0))
        throw ContractError("heavy-hole mass must be positive");
    if (holes < 0)
        throw ContractError("hole count must be non-negative");
}

ReplicaField replica_field(double voltage, int holes, DiodeGeometry const &geom,
                           TrapFieldModel const &trap) {
    trap.validate();
    if (holes < 0)
        throw ContractError("hole count must be non-negative");
    ReplicaField out;
    out.applied = capacitor_field(voltage, geom);
    out.total = out.applied;
    if (holes == 0)
        return out;

    // The hole sits in the well only while the applied field confines it.
    if (!(out.applied > 0.0))
        throw ContractError("replica_field: trapped holes need a positive applied field");
    out.delta_nm = triangular_well(out.applied, trap).delta_nm;
    double const k = units::coulomb_v_nm / trap.epsilon_r * holes;
    double const r = trap.delta0 + out.delta_nm;
    out.charge = k / (r * r);
    if (trap.image == ImageCharge::grounded_plane) {
        double const ri = trap.delta0 + 2.0 * trap.d - out.delta_nm;
        out.image = -k / (ri * ri);
    }
    out.total = out.applied + out.charge + out.image;
    return out;
}

double franz_keldysh_onset(double eg_ev, double eph_ev, DiodeGeometry const &geom,
                           TrapFieldModel const &trap) {
    geom.validate();
    trap.validate();
    if (eg_ev < eph_ev)
        throw ContractError("franz_keldysh_onset: photon energy exceeds the band gap");
    return geom.vb - (eg_ev - eph_ev) * geom.thickness / trap.d;
}

} // namespace qdcascade
