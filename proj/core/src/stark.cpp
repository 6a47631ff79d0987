#include "qdcascade/stark.hpp"

#include "qdcascade/errors.hpp"

#include <cmath>
#include <vector>

namespace qdcascade {

StarkParams make_stark_params(double e0, double alpha, double beta, int charge) {
    StarkParams p;
    p.e0 = {e0, 0.0};
    p.alpha = {alpha, 0.0};
    p.beta = {beta, 0.0};
    p.charge = charge;
    return p;
}

double stark_energy(StarkParams const &params, double field) {
    return params.e0.value - params.alpha.value * field -
           params.beta.value * field * field;
}

double stark_vertex_field(StarkParams const &params) {
    if (params.beta.value == 0.0)
        throw ContractError("stark_vertex_field: beta is zero");
    return -params.alpha.value / (2.0 * params.beta.value);
}

StarkParams fit_stark_field(std::span<StarkPoint const> points) {
    auto const n = static_cast<Eigen::Index>(points.size());
    if (n < 4)
        throw FitError("Stark fit needs at least four points");

    bool weighted = true;
    for (auto const &p : points) {
        if (!(p.sigma > 0.0))
            weighted = false;
    }

    // Columns are scaled to unit norm before the QR so that the rank test
    // is not fooled by F ~ 1e-3 V/nm.
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto const &p = points[static_cast<std::size_t>(i)];
        double const w = weighted ? 1.0 / p.sigma : 1.0;
        a(i, 0) = w;
        a(i, 1) = -p.x * w;
        a(i, 2) = -p.x * p.x * w;
        y[i] = p.energy * w;
    }
    Eigen::Vector3d scale;
    for (int j = 0; j < 3; ++j) {
        double const norm = a.col(j).norm();
        scale[j] = norm > 0.0 ? 1.0 / norm : 1.0;
    }
    Eigen::MatrixXd const as = a * scale.asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3)
        throw FitError("Stark fit: design matrix is rank deficient "
                       "(need at least three distinct fields)");
    Eigen::Vector3d const coef = scale.asDiagonal() * qr.solve(y);

    Eigen::VectorXd const resid = y - a * coef;
    double const chi2 = resid.squaredNorm();
    long const dof = static_cast<long>(n) - 3;

    Eigen::Matrix3d const rinv = [&] {
        Eigen::MatrixXd r = qr.matrixR().topLeftCorner(3, 3).triangularView<Eigen::Upper>();
        return Eigen::Matrix3d(r.inverse());
    }();
    // (As^T As)^-1 = P R^-1 R^-T P^T
    Eigen::Matrix3d cov_scaled = rinv * rinv.transpose();
    auto const perm = qr.colsPermutation();
    cov_scaled = perm * cov_scaled * perm.transpose();
    Eigen::Matrix3d cov = scale.asDiagonal() * cov_scaled * scale.asDiagonal();
    if (!weighted)
        cov *= dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;

    StarkParams out;
    out.e0 = {coef[0], std::sqrt(std::max(cov(0, 0), 0.0))};
    out.alpha = {coef[1], std::sqrt(std::max(cov(1, 1), 0.0))};
    out.beta = {coef[2], std::sqrt(std::max(cov(2, 2), 0.0))};
    out.covariance = cov;
    out.chi2 = chi2;
    out.dof = dof;
    return out;
}

StarkParams fit_stark(std::span<StarkPoint const> points, DiodeGeometry const &geom) {
    geom.validate();
    std::vector<StarkPoint> field_points(points.begin(), points.end());
    for (auto &p : field_points)
        p.x = capacitor_field(p.x, geom);
    return fit_stark_field(field_points);
}

namespace {

// Covariance of a parameter set, falling back to the quoted errors when no
// fit covariance is attached (e.g. tabulated values).
Eigen::Matrix3d effective_covariance(StarkParams const &p) {
    if (!p.covariance.isZero())
        return p.covariance;
    Eigen::Vector3d const err(p.e0.error, p.alpha.error, p.beta.error);
    return err.cwiseAbs2().asDiagonal();
}

} // namespace

StarkParams state_params(StarkParams const &xx_line, StarkParams const &x_line) {
    StarkParams out;
    out.e0 = sum(xx_line.e0, x_line.e0);
    out.alpha = sum(xx_line.alpha, x_line.alpha);
    out.beta = sum(xx_line.beta, x_line.beta);
    out.covariance = effective_covariance(xx_line) + effective_covariance(x_line);
    out.charge = 2;
    return out;
}

} // namespace qdcascade
