#pragma once

// Michelson fringe and coherence-envelope analysis.

#include "qdcascade/interferometer.hpp"
#include "qdcascade/levenberg_marquardt.hpp"
#include "qdcascade/measured.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <utility>

namespace qdcascade {

struct FringeFit {
    double visibility = 0.0;
    double phase = 0.0;
    double i0 = 0.0;
    double amplitude = 0.0;
    double residual_rms = 0.0;
};

/// Linear least squares of I(x) = c0 + c1 cos(k x) + c2 sin(k x) with
/// k = 4 pi / lambda; v = sqrt(c1^2 + c2^2) / c0. Throws AliasingError when
/// the largest position step is not below lambda / 4, FitError for fewer
/// than three samples or a non-positive mean intensity.
FringeFit fit_fringe(std::span<FringeSample const> samples, double wavelength_nm);

struct CoherencePoint {
    double delay_ps = 0.0;
    double visibility = 0.0;
    /// 1-sigma error; 0 for unweighted points.
    double sigma = 0.0;
};

/// 0.5346 f_L + sqrt(0.2166 f_L^2 + f_G^2).
double olivero_linewidth(double f_lorentz, double f_gauss);

/// (Gamma0_X, Gamma0_XX) in ueV: hbar / tau_x and hbar (1 / tau_x + 1 / tau_xx).
/// Gamma0_XX is 0 when tau_xx is not given.
std::pair<double, double> transform_limit(double tau_x,
                                          std::optional<double> tau_xx = std::nullopt);

struct CoherenceFit {
    Measured f_lorentz;  ///< ueV
    Measured f_gauss;    ///< ueV
    Measured gamma;      ///< Olivero linewidth, ueV
    std::optional<double> gamma0;
    std::optional<Measured> ratio;  ///< Gamma / Gamma0
    double chi2 = 0.0;
    long dof = 0;
    /// Covariance of (f_L, f_G^2).
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();

    [[nodiscard]] double envelope(double delay_ps) const;
};

/// Nonlinear fit of v(tau) = exp(-pi dnu_L |tau|) exp(-(pi dnu_G tau)^2 /
/// (4 ln 2)). The Gaussian width enters as f_G^2 so that a vanishing
/// Gaussian part stays identifiable. Unweighted points give a covariance
/// scaled by the reduced chi2. Needs six points; FitError when the
/// envelope does not decay.
CoherenceFit fit_coherence(std::span<CoherencePoint const> points,
                           std::optional<double> gamma0 = std::nullopt,
                           LmOptions const &lm = {});

} // namespace qdcascade
