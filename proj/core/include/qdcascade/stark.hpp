#pragma once

// Quadratic Stark shift E(F) = E0 - alpha F - beta F^2 with F in V/nm,
// alpha in eV nm / V and beta in eV nm^2 / V^2.

#include "qdcascade/field_models.hpp"
#include "qdcascade/measured.hpp"

#include <Eigen/Dense>

#include <span>

namespace qdcascade {

struct StarkParams {
    Measured e0;
    Measured alpha;
    Measured beta;
    /// Covariance of (E0, alpha, beta).
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    /// Charge of the dipole in units of e.
    int charge = 1;
    double chi2 = 0.0;
    long dof = 0;

    /// beta / q in nm^2 / V.
    [[nodiscard]] Measured beta_per_charge() const {
        return {beta.value / charge, beta.error / charge};
    }
};

StarkParams make_stark_params(double e0, double alpha, double beta, int charge = 1);

double stark_energy(StarkParams const &params, double field);

/// Field of the parabola vertex, -alpha / (2 beta).
double stark_vertex_field(StarkParams const &params);

struct StarkPoint {
    double x = 0.0;       ///< voltage (V) or field (V/nm)
    double energy = 0.0;  ///< eV
    /// 1-sigma energy error; 0 for unweighted points.
    double sigma = 0.0;
};

/// Weighted linear least squares in the field. When every point carries a
/// sigma the covariance is (A^T W A)^-1; otherwise it is scaled by the
/// residual variance. Needs at least four points; FitError if the design
/// matrix is rank deficient.
StarkParams fit_stark_field(std::span<StarkPoint const> points);

/// As fit_stark_field after mapping voltages to F = (Vb - V) / D.
StarkParams fit_stark(std::span<StarkPoint const> points,
                      DiodeGeometry const &geom = {});

/// Parameters of the biexciton state: component-wise sums of the XX and X
/// line parameters (independent errors), with q = 2.
StarkParams state_params(StarkParams const &xx_line, StarkParams const &x_line);

} // namespace qdcascade
