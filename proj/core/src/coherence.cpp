#include "qdcascade/coherence.hpp"

#include "qdcascade/errors.hpp"
#include "qdcascade/units.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace qdcascade {

namespace {

constexpr double olivero_a = 0.5346;
constexpr double olivero_b = 0.2166;

// pi * (1 / ps per ueV): dnu = f * per_uev.
double const per_uev = units::uev_to_per_ps(1.0);
double const pi_c = std::numbers::pi * per_uev;
double const gauss_c = pi_c * pi_c / (4.0 * std::numbers::ln2);

} // namespace

FringeFit fit_fringe(std::span<FringeSample const> samples, double wavelength_nm) {
    if (!(wavelength_nm > 0.0))
        throw ContractError("fit_fringe: wavelength must be positive");
    if (samples.size() < 3)
        throw FitError("fit_fringe: need at least three samples");

    std::vector<double> xs;
    xs.reserve(samples.size());
    for (auto const &s : samples)
        xs.push_back(s.position_nm);
    std::sort(xs.begin(), xs.end());
    double max_step = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        max_step = std::max(max_step, xs[i] - xs[i - 1]);
    // One fringe spans lambda / 2 of mirror travel.
    if (max_step >= wavelength_nm / 4.0)
        throw AliasingError("fit_fringe: step of " + std::to_string(max_step) +
                            " nm is not below lambda / 4 = " +
                            std::to_string(wavelength_nm / 4.0) + " nm");

    double const k = 4.0 * std::numbers::pi / wavelength_nm;
    auto const n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto const &s = samples[static_cast<std::size_t>(i)];
        a(i, 0) = 1.0;
        a(i, 1) = std::cos(k * s.position_nm);
        a(i, 2) = std::sin(k * s.position_nm);
        y[i] = s.intensity;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 3)
        throw FitError("fit_fringe: samples do not resolve the fringe");
    Eigen::Vector3d const c = qr.solve(y);
    if (!(c[0] > 0.0))
        throw FitError("fit_fringe: mean intensity is not positive");

    FringeFit out;
    out.i0 = c[0];
    out.amplitude = std::hypot(c[1], c[2]);
    out.visibility = out.amplitude / c[0];
    out.phase = std::atan2(-c[2], c[1]);
    out.residual_rms = std::sqrt((y - a * c).squaredNorm() / static_cast<double>(n));
    return out;
}

double olivero_linewidth(double f_lorentz, double f_gauss) {
    return olivero_a * f_lorentz +
           std::sqrt(olivero_b * f_lorentz * f_lorentz + f_gauss * f_gauss);
}

std::pair<double, double> transform_limit(double tau_x, std::optional<double> tau_xx) {
    if (!(tau_x > 0.0) || (tau_xx && !(*tau_xx > 0.0)))
        throw ContractError("transform_limit: lifetimes must be positive");
    double const hbar_uev_ps = units::hbar_mev_ps * 1e3;
    double const g_x = hbar_uev_ps / tau_x;
    double const g_xx = tau_xx ? hbar_uev_ps * (1.0 / tau_x + 1.0 / *tau_xx) : 0.0;
    return {g_x, g_xx};
}

double CoherenceFit::envelope(double delay_ps) const {
    return lorentzian_envelope(f_lorentz.value, delay_ps) *
           gaussian_envelope(f_gauss.value, delay_ps);
}

CoherenceFit fit_coherence(std::span<CoherencePoint const> points,
                           std::optional<double> gamma0, LmOptions const &lm_options) {
    auto const n = static_cast<Eigen::Index>(points.size());
    if (n < 6)
        throw FitError("fit_coherence: need at least six delay points");
    bool weighted = true;
    for (auto const &p : points) {
        if (!(p.sigma > 0.0))
            weighted = false;
    }

    // Starting point from a log-linear fit of the points with v > 0.
    double sxx = 0.0;
    double sxy = 0.0;
    double max_v = 0.0;
    for (auto const &p : points) {
        max_v = std::max(max_v, p.visibility);
        if (p.visibility <= 0.0)
            continue;
        double const t = std::abs(p.delay_ps);
        sxx += t * t;
        sxy += t * std::log(std::min(p.visibility, 1.0));
    }
    double const slope = sxx > 0.0 ? -sxy / sxx : 0.0;
    if (!(slope > 0.0) || !(max_v > 0.0))
        throw FitError("fit_coherence: envelope does not decay");
    double const f_start = slope / pi_c;

    auto residual = [&](Eigen::VectorXd const &p, Eigen::VectorXd &r,
                        Eigen::MatrixXd *jac) {
        for (Eigen::Index i = 0; i < n; ++i) {
            auto const &pt = points[static_cast<std::size_t>(i)];
            double const t = std::abs(pt.delay_ps);
            double const w = weighted ? 1.0 / pt.sigma : 1.0;
            double const v = std::exp(-pi_c * p[0] * t - gauss_c * p[1] * t * t);
            r[i] = (pt.visibility - v) * w;
            if (jac) {
                (*jac)(i, 0) = pi_c * t * v * w;
                (*jac)(i, 1) = gauss_c * t * t * v * w;
            }
        }
    };
    LmOptions lm = lm_options;
    if (!lm.feasible)
        lm.feasible = [](Eigen::VectorXd const &p) { return p[0] >= 0.0 && p[1] >= 0.0; };

    std::optional<LmResult> best;
    for (double split : {0.5, 0.9, 0.1}) {
        Eigen::VectorXd p0(2);
        p0 << split * f_start, std::pow((1.0 - split) * f_start, 2);
        try {
            auto res = levenberg_marquardt(residual, p0, n, lm);
            if (!best || res.chi2 < best->chi2)
                best = std::move(res);
        } catch (FitError const &) {
        }
    }
    if (!best)
        throw FitError("fit_coherence: no starting point converged");

    Eigen::Matrix2d cov = best->covariance;
    if (!weighted)
        cov *= best->chi2_reduced();

    CoherenceFit out;
    double const fl = best->params[0];
    double const g2 = best->params[1];
    double const fg = std::sqrt(std::max(g2, 0.0));
    double const var_g2 = std::max(cov(1, 1), 0.0);
    out.f_lorentz = {fl, std::sqrt(std::max(cov(0, 0), 0.0))};
    // At f_G = 0 the linearized error is infinite; report sqrt(sigma_{f_G^2}).
    out.f_gauss = {fg, fg > 0.0 ? std::sqrt(var_g2) / (2.0 * fg) : std::sqrt(std::sqrt(var_g2))};
    out.covariance = cov;
    out.chi2 = best->chi2;
    out.dof = static_cast<long>(best->dof);

    // Gamma as a function of (f_L, f_G^2).
    double const root = std::sqrt(olivero_b * fl * fl + g2);
    double const gamma = olivero_a * fl + root;
    Eigen::Vector2d grad;
    grad[0] = olivero_a + (root > 0.0 ? olivero_b * fl / root : 0.0);
    grad[1] = root > 0.0 ? 0.5 / root : 0.0;
    out.gamma = {gamma, std::sqrt(std::max(grad.dot(cov * grad), 0.0))};
    if (gamma0) {
        if (!(*gamma0 > 0.0))
            throw ContractError("fit_coherence: gamma0 must be positive");
        out.gamma0 = gamma0;
        out.ratio = Measured{gamma / *gamma0, out.gamma.error / *gamma0};
    }
    return out;
}

} // namespace qdcascade
