#include "qdcascade/levenberg_marquardt.hpp"

#include "qdcascade/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qdcascade {

namespace {

std::string diagnostics(char const *reason, double chi2, int iterations,
                        Eigen::VectorXd const &r, Eigen::VectorXd const &p) {
    std::ostringstream os;
    os << "Levenberg-Marquardt: " << reason << " after " << iterations
       << " iterations (chi2 = " << chi2 << ", max |residual| = "
       << (r.size() ? r.cwiseAbs().maxCoeff() : 0.0) << ", params =";
    for (Eigen::Index i = 0; i < p.size(); ++i)
        os << ' ' << p[i];
    os << ')';
    return os.str();
}

} // namespace

LmResult levenberg_marquardt(ResidualFunction const &residual,
                             Eigen::VectorXd initial, Eigen::Index n_residuals,
                             LmOptions const &options) {
    auto const n_params = initial.size();
    if (n_params == 0)
        throw FitError("Levenberg-Marquardt: no parameters");
    if (n_residuals < n_params)
        throw FitError("Levenberg-Marquardt: fewer residuals than parameters");
    if (options.feasible && !options.feasible(initial))
        throw FitError("Levenberg-Marquardt: initial point is infeasible");

    Eigen::VectorXd p = std::move(initial);
    Eigen::VectorXd r(n_residuals);
    Eigen::MatrixXd jac(n_residuals, n_params);
    residual(p, r, &jac);
    double chi2 = r.squaredNorm();
    if (!std::isfinite(chi2))
        throw FitError(diagnostics("non-finite residuals at the start", chi2, 0, r, p));

    double lambda = options.lambda0;
    Eigen::VectorXd trial_r(n_residuals);
    int iteration = 0;
    bool converged = false;

    while (iteration < options.max_iterations) {
        ++iteration;
        Eigen::MatrixXd const jtj = jac.transpose() * jac;
        Eigen::VectorXd const grad = jac.transpose() * r;
        if (grad.cwiseAbs().maxCoeff() <= options.gtol) {
            converged = true;
            break;
        }
        Eigen::VectorXd diag = jtj.diagonal();
        for (Eigen::Index i = 0; i < n_params; ++i)
            diag[i] = std::max(diag[i], 1e-300);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * diag;
            Eigen::VectorXd const step = damped.ldlt().solve(-grad);
            Eigen::VectorXd const trial = p + step;

            bool small_step = true;
            for (Eigen::Index i = 0; i < n_params; ++i) {
                if (std::abs(step[i]) > options.xtol * (std::abs(p[i]) + options.xtol))
                    small_step = false;
            }

            double trial_chi2 = std::numeric_limits<double>::infinity();
            if (step.allFinite() && (!options.feasible || options.feasible(trial))) {
                residual(trial, trial_r, nullptr);
                trial_chi2 = trial_r.squaredNorm();
            }
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
                double const drop = chi2 - trial_chi2;
                p = trial;
                residual(p, r, &jac);
                chi2 = r.squaredNorm();
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (drop <= options.ftol * chi2 || small_step)
                    converged = true;
            } else {
                if (small_step) {
                    // No downhill step exists at this resolution.
                    converged = true;
                    break;
                }
                lambda *= 4.0;
                if (lambda > 1e16)
                    throw FitError(diagnostics("damping diverged", chi2, iteration, r, p));
            }
        }
        if (converged)
            break;
    }
    if (!converged)
        throw FitError(diagnostics("no convergence", chi2, iteration, r, p));

    // Invert in the unit-diagonal scaling so that parameters of very
    // different magnitude do not fool the rank test.
    Eigen::MatrixXd const jtj = jac.transpose() * jac;
    Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd const scaled = scale.asDiagonal() * jtj * scale.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
    lu.setThreshold(1e-12);
    if (lu.rank() < n_params)
        throw FitError(diagnostics("singular normal matrix at the solution", chi2,
                                   iteration, r, p));

    LmResult out;
    out.params = p;
    out.covariance = scale.asDiagonal() * lu.inverse() * scale.asDiagonal();
    out.chi2 = chi2;
    out.dof = n_residuals - n_params;
    out.iterations = iteration;
    return out;
}

} // namespace qdcascade
