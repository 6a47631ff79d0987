#include "qdcascade/errors.hpp"
#include "qdcascade/field_models.hpp"
#include "qdcascade/units.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qdcascade {

namespace {

// hbar^2 / 2 m0 in meV nm^2.
double const kinetic_mev_nm2 = units::hbar_si * units::hbar_si /
                               (2.0 * units::electron_mass) /
                               units::elementary_charge * 1e3 * 1e18;

void check_field(double field_v) {
    if (!(field_v > 0.0))
        throw ContractError("triangular well needs a positive field");
}

// Airy length (hbar^2 / 2 m e F)^(1/3) in nm; eF in meV/nm.
double airy_length(double field_v, double m_hh) {
    return std::cbrt(kinetic_mev_nm2 / m_hh / (field_v * 1e3));
}

// Number of eigenvalues of the symmetric tridiagonal matrix (diag, off)
// below x.
std::size_t sturm_count(std::vector<double> const &diag, double off, double x) {
    std::size_t count = 0;
    double q = diag[0] - x;
    if (q < 0.0)
        ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        if (q == 0.0)
            q = 1e-300;
        q = diag[i] - x - off * off / q;
        if (q < 0.0)
            ++count;
    }
    return count;
}

// Solves (T - shift) x = rhs for tridiagonal T with constant off-diagonal.
void solve_shifted(std::vector<double> const &diag, double off, double shift,
                   std::vector<double> &x) {
    auto const n = diag.size();
    std::vector<double> c(n);
    std::vector<double> d(n);
    double denom = diag[0] - shift;
    c[0] = off / denom;
    d[0] = x[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - shift - off * c[i - 1];
        if (denom == 0.0)
            denom = 1e-300;
        c[i] = off / denom;
        d[i] = (x[i] - off * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = d[i] - c[i] * x[i + 1];
}

} // namespace

WellLevel triangular_well(double field_v, TrapFieldModel const &trap) {
    check_field(field_v);
    trap.validate();
    double const ef = field_v * 1e3;  // meV / nm
    WellLevel out;
    out.energy_mev =
        -units::first_airy_zero * std::cbrt(kinetic_mev_nm2 / trap.m_hh * ef * ef);
    out.delta_nm = 2.0 * out.energy_mev / (3.0 * ef);
    out.mean_potential_mev = ef * out.delta_nm;
    return out;
}

WellLevel triangular_well_numeric(double field_v, TrapFieldModel const &trap,
                                  WellSolverOptions const &options) {
    check_field(field_v);
    trap.validate();
    if (options.points < 16 || !(options.box_lengths > 4.0))
        throw ContractError("triangular well solver: grid too small");

    double const ef = field_v * 1e3;
    double const length = options.box_lengths * airy_length(field_v, trap.m_hh);
    auto const n = options.points;
    double const h = length / static_cast<double>(n + 1);
    double const kin = kinetic_mev_nm2 / trap.m_hh / (h * h);

    // Interior points z_i = (i + 1) h with hard walls at 0 and length.
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = 2.0 * kin + ef * static_cast<double>(i + 1) * h;
    double const off = -kin;

    // Gershgorin bounds, then bisection on the Sturm count for the lowest
    // eigenvalue.
    double lo = *std::min_element(diag.begin(), diag.end()) - 2.0 * kin;
    double hi = lo + 2.0 * kin + ef * length;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::abs(hi); ++it) {
        double const mid = 0.5 * (lo + hi);
        if (sturm_count(diag, off, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    double const energy = 0.5 * (lo + hi);

    // Inverse iteration with a slightly lowered shift.
    std::vector<double> vec(n, 1.0);
    double const shift = energy - 1e-9 * std::max(1.0, std::abs(energy));
    for (int it = 0; it < 4; ++it) {
        solve_shifted(diag, off, shift, vec);
        double norm = 0.0;
        for (double v : vec)
            norm += v * v;
        norm = std::sqrt(norm);
        for (double &v : vec)
            v /= norm;
    }

    double weight = 0.0;
    double zsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const p = vec[i] * vec[i];
        weight += p;
        zsum += p * static_cast<double>(i + 1) * h;
    }
    WellLevel out;
    out.energy_mev = energy;
    out.delta_nm = zsum / weight;
    out.mean_potential_mev = ef * out.delta_nm;
    return out;
}

} // namespace qdcascade
