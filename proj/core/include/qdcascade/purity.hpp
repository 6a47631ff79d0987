#pragma once

// Single-photon purity of one cascade photon from the discretized
// two-photon amplitude psi(t1, t2) ~ exp(-t1 / 2 tau_xx)
// exp(-(t2 - t1) / 2 tau_x) [t2 > t1].

#include <Eigen/Dense>

#include <cstddef>

namespace qdcascade {

struct PurityResult {
    /// Tr(rho^2), Richardson-extrapolated from grid_n and grid_n / 2.
    double purity = 0.0;
    /// Tr(rho^2) on the grid_n grid.
    double raw = 0.0;
    /// Tr(rho^2) on the grid_n / 2 grid.
    double coarse = 0.0;
    /// |Tr(rho) - 1| after normalization.
    double trace_error = 0.0;
    std::size_t grid_n = 0;
    double t_max = 0.0;
};

/// Smallest admissible t_max for the given lifetimes.
inline double purity_min_t_max(double tau_xx, double tau_x) {
    return 10.0 * (tau_xx + tau_x);
}

/// Reduced density matrix of the first photon on a grid_n cell grid over
/// [0, t_max): entries are the integrals of rho(t, t') over cell pairs,
/// normalized to unit trace. t_max <= 0 selects purity_min_t_max.
Eigen::MatrixXd reduced_density_matrix(double tau_xx, double tau_x,
                                       std::size_t grid_n, double t_max = 0.0);

/// Tr(rho^2) of one photon of the cascade. Requires grid_n >= 256 (even)
/// and t_max >= 10 (tau_xx + tau_x); t_max <= 0 selects the minimum.
/// O(grid_n^2) time, O(grid_n) memory.
PurityResult purity_oracle(double tau_xx, double tau_x,
                           std::size_t grid_n = 2048, double t_max = 0.0);

/// Closed form 1 / (1 + r).
double purity_limit(double r);

} // namespace qdcascade
