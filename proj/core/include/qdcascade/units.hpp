#pragma once

// Physical constants and unit conversions. Every conversion in the library
// goes through this header.

#include <numbers>

namespace qdcascade::units {

// CODATA 2018 exact / recommended values, SI.
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar_si = 1.054571817e-34;            // J s
inline constexpr double electron_mass = 9.1093837015e-31;     // kg
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double speed_of_light = 299792458.0;         // m/s

inline constexpr double hbar_mev_ps = 0.6582119569;   // meV ps
inline constexpr double planck_uev_ns = 4.135667696;  // ueV ns
inline constexpr double hc_ev_nm = 1239.841984;       // eV nm

inline constexpr double speed_of_light_mm_per_ps = 0.299792458;

/// FWHM / sigma for a Gaussian.
inline constexpr double gaussian_fwhm_per_sigma = 2.3548200450309493; // 2 sqrt(2 ln 2)

inline constexpr double first_airy_zero = -2.338107410459767;

/// Energy (ueV) to frequency (1/ps).
constexpr double uev_to_per_ps(double energy_uev) {
    return energy_uev / planck_uev_ns * 1e-3;
}

constexpr double per_ps_to_uev(double freq_per_ps) {
    return freq_per_ps * 1e3 * planck_uev_ns;
}

constexpr double wavelength_nm_from_ev(double energy_ev) {
    return hc_ev_nm / energy_ev;
}

// Fields: V/nm internally; kV/cm at the CLI boundary.
constexpr double v_per_nm_to_kv_per_cm(double f) { return f * 1e4; }
constexpr double kv_per_cm_to_v_per_nm(double f) { return f * 1e-4; }

/// e / (4 pi eps0) in V nm.
inline constexpr double coulomb_v_nm =
    elementary_charge / (4.0 * std::numbers::pi * vacuum_permittivity) * 1e9;

} // namespace qdcascade::units
