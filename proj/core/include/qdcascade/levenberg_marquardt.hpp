#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qdcascade {

/// Fills weighted residuals r_i = (y_i - f_i(p)) / sigma_i and, when
/// `jacobian` is non-null, dr_i/dp_j.
using ResidualFunction = std::function<void(Eigen::VectorXd const &params,
                                            Eigen::VectorXd &residuals,
                                            Eigen::MatrixXd *jacobian)>;

struct LmOptions {
    int max_iterations = 500;
    /// Stop when an accepted step lowers chi2 by less than ftol relative.
    double ftol = 1e-12;
    /// Stop when every |step_j| <= xtol (|p_j| + xtol).
    double xtol = 1e-12;
    /// Stop when max |J^T r| <= gtol.
    double gtol = 1e-14;
    double lambda0 = 1e-3;
    /// Rejects trial points outside the model's domain; rejected steps
    /// are treated like uphill steps.
    std::function<bool(Eigen::VectorXd const &)> feasible;
};

struct LmResult {
    Eigen::VectorXd params;
    /// (J^T J)^-1 at the solution, not scaled by the reduced chi2.
    Eigen::MatrixXd covariance;
    double chi2 = 0.0;
    Eigen::Index dof = 0;
    int iterations = 0;

    [[nodiscard]] double chi2_reduced() const noexcept {
        return dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
    }
    [[nodiscard]] double error(Eigen::Index i) const {
        return std::sqrt(covariance(i, i));
    }
};

/// Damped Gauss-Newton minimization of sum r_i^2 with Marquardt's
/// diagonal scaling. Throws FitError when the iteration budget runs out,
/// the damping diverges, or J^T J is singular at the solution.
LmResult levenberg_marquardt(ResidualFunction const &residual,
                             Eigen::VectorXd initial, Eigen::Index n_residuals,
                             LmOptions const &options = {});

} // namespace qdcascade
