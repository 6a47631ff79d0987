#pragma once

// Closed-form electrostatics of the diode: capacitor field, trapped-hole
// replica field with a triangular-well hole position, and the
// Franz-Keldysh onset voltage. Fields in V/nm, lengths in nm.

#include <cstddef>

namespace qdcascade {

struct DiodeGeometry {
    double vb = 1.7;          ///< built-in voltage, V
    double thickness = 305.0; ///< intrinsic region, nm

    void validate() const;
};

/// (Vb - V) / D.
double capacitor_field(double voltage, DiodeGeometry const &geom);

/// Voltage at which the capacitor field equals `field`.
double voltage_for_field(double field, DiodeGeometry const &geom);

enum class ImageCharge { none, grounded_plane };

struct TrapFieldModel {
    double delta0 = 11.5;      ///< QD center to barrier interface, nm
    double d = 15.1;           ///< hole-trapping barrier thickness, nm
    double epsilon_r = 11.4;
    double m_hh = 0.51;        ///< heavy-hole mass, units of m0
    int holes = 0;
    ImageCharge image = ImageCharge::grounded_plane;

    void validate() const;
};

/// Ground state of a hole in the triangular well V(z) = e F z, z > 0.
struct WellLevel {
    double energy_mev = 0.0;
    double delta_nm = 0.0;          ///< <z>
    double mean_potential_mev = 0.0; ///< <V> = e F <z>
};

/// Airy solution: E1 = -a1 (hbar^2 (e F)^2 / 2 m)^(1/3), <z> = 2 E1 / 3 e F.
/// Throws ContractError for F_v <= 0.
WellLevel triangular_well(double field_v, TrapFieldModel const &trap);

struct WellSolverOptions {
    std::size_t points = 10'000;
    /// Box length in units of the Airy length (hbar^2 / 2 m e F)^(1/3).
    double box_lengths = 20.0;
};

/// Finite-difference solution of the same well: lowest eigenvalue of the
/// tridiagonal Hamiltonian by Sturm bisection, eigenvector by inverse
/// iteration.
WellLevel triangular_well_numeric(double field_v, TrapFieldModel const &trap,
                                  WellSolverOptions const &options = {});

/// Field at the QD with n trapped holes, by component.
struct ReplicaField {
    double applied = 0.0;   ///< F_v
    double charge = 0.0;    ///< F_c, point charges at delta0 + delta
    double image = 0.0;     ///< F_m, image charges in the n-doped layer
    double total = 0.0;
    double delta_nm = 0.0;
};

/// F = F_v + n e / (4 pi eps0 eps_r (delta(F_v) + delta0)^2) + F_m. With a
/// grounded plane at the far side of the barrier the image term is
/// -n e / (4 pi eps0 eps_r (delta0 + 2 d - delta)^2). n = 0 returns F_v.
ReplicaField replica_field(double voltage, int holes, DiodeGeometry const &geom,
                           TrapFieldModel const &trap);

inline ReplicaField replica_field(double voltage, DiodeGeometry const &geom,
                                  TrapFieldModel const &trap) {
    return replica_field(voltage, trap.holes, geom, trap);
}

/// Voltage where e F d equals Eg - Eph: Vb - (Eg - Eph) D / d.
double franz_keldysh_onset(double eg_ev, double eph_ev, DiodeGeometry const &geom,
                           TrapFieldModel const &trap);

} // namespace qdcascade
