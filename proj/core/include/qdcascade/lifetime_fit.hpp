#pragma once

// Time-resolved photoluminescence fits: mono- and biexponential decays
// convolved with a Gaussian instrument response.

#include "qdcascade/levenberg_marquardt.hpp"
#include "qdcascade/measured.hpp"
#include "qdcascade/timetag.hpp"

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace qdcascade {

/// Scaled complementary error function exp(z^2) erfc(z).
double erfcx(double z);

/// exp(-t / tau) theta(t) convolved with a unit-area Gaussian of width
/// sigma (ps). sigma = 0 gives the bare decay with theta(0) = 1/2.
double exp_gauss(double t, double tau, double sigma);

/// Gaussian fit of an instrument-response histogram.
struct IrfEstimate {
    Measured center;
    Measured fwhm;
    double area = 0.0;
};

/// Fits A G(t - mu; sigma). Histograms with fewer than three occupied bins
/// fall back to moments (a single occupied bin gives fwhm = 0).
IrfEstimate fit_irf_gaussian(CoincidenceHistogram const &irf);

struct IrfSpec {
    double fwhm = 0.0;
    /// Expected zero-delay position; NaN if unknown.
    double center = std::numeric_limits<double>::quiet_NaN();
    /// Fit the IRF width instead of holding it at `fwhm`.
    bool float_width = false;

    static IrfSpec from_histogram(CoincidenceHistogram const &irf);
};

struct LifetimeFitOptions {
    IrfSpec irf;
    /// Bins with fewer counts are excluded from the fit.
    double count_floor = 0.0;
    /// Optional delay window [fit_lo, fit_hi] in ps.
    std::optional<double> fit_lo;
    std::optional<double> fit_hi;
    /// Bi fits: hold tau_xx at this value (e.g. from a mono fit of the XX
    /// line); its error is added in quadrature to derived ratios.
    std::optional<Measured> tau_xx_constraint;
    /// Bi fits: expected tau_xx used to label the two time constants.
    /// Without it the shorter constant is reported as tau_xx.
    double tau_xx_hint = 0.0;
    /// Relative gap |tau_a - tau_b| / max below which the bi fit is
    /// replaced by the degenerate limit t exp(-t / tau).
    double degenerate_tolerance = 0.02;
    LmOptions lm;
};

enum class LifetimeModel { mono, bi, bi_degenerate };

struct LifetimeFit {
    LifetimeModel model = LifetimeModel::mono;
    Measured tau_xx;
    std::optional<Measured> tau_x;
    Measured amplitude;  ///< total decay counts
    Measured offset;     ///< counts per bin
    Measured t0;
    Measured irf_fwhm;
    double bin_width = 1.0;
    bool tau_xx_fixed = false;

    double chi2 = 0.0;
    long dof = 0;
    double chi2_red = 0.0;
    int iterations = 0;
    std::size_t bins_used = 0;

    std::vector<std::string> parameter_names;
    Eigen::VectorXd parameters;
    Eigen::MatrixXd covariance;

    /// r = tau_xx / tau_x with first-order propagation over the full
    /// covariance (bi fits only).
    [[nodiscard]] Measured ratio() const;
    /// Expected counts per bin at delay t.
    [[nodiscard]] double model_value(double t) const;
};

/// A exp(-t / tau) theta(t) (x) IRF + offset.
LifetimeFit fit_lifetime_mono(CoincidenceHistogram const &hist,
                              LifetimeFitOptions const &options = {});

/// A (e^(-t/tau_x) - e^(-t/tau_xx)) theta(t) (x) IRF + offset, normalized so
/// that A is the decay area.
LifetimeFit fit_lifetime_bi(CoincidenceHistogram const &hist,
                            LifetimeFitOptions const &options = {});

} // namespace qdcascade
