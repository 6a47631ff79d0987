#include "qdcascade/errors.hpp"
#include "qdcascade/purity.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace qdcascade;

namespace {

// Midpoint-sampled amplitude on an n x n grid, rho = Psi Psi^T dt, then
// Tr(rho^2) / Tr(rho)^2.
double dense_midpoint_purity(double txx, double tx, std::size_t n, double t_max) {
    double const h = t_max / static_cast<double>(n);
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double const t1 = (static_cast<double>(i) + 0.5) * h;
            double const t2 = (static_cast<double>(j) + 0.5) * h;
            double v = 0.0;
            if (t2 > t1)
                v = std::exp(-t1 / (2 * txx) - (t2 - t1) / (2 * tx));
            else if (i == j)
                v = 0.5 * std::exp(-t1 / (2 * txx));  // diagonal cell is half inside
            psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    Eigen::MatrixXd const rho = psi * psi.transpose();
    double const tr = rho.trace();
    return (rho * rho).trace() / (tr * tr);
}

} // namespace

TEST(Purity, MatchesClosedForm) {
    for (auto [txx, tx] : {std::pair{161.0, 619.0}, {112.0, 175.0}, {133.0, 227.0},
                           {100.0, 100.0}, {50.0, 800.0}}) {
        auto const r = purity_oracle(txx, tx);
        EXPECT_NEAR(r.purity, 1.0 / (1.0 + txx / tx), 1e-3) << txx << " " << tx;
        EXPECT_LT(r.trace_error, 1e-12);
        EXPECT_EQ(r.grid_n, 2048u);
        EXPECT_GE(r.t_max, purity_min_t_max(txx, tx));
    }
    EXPECT_DOUBLE_EQ(purity_limit(0.26), 1.0 / 1.26);
}

TEST(Purity, RichardsonImprovesOnRawGrid) {
    auto const r = purity_oracle(161, 619, 1024);
    double const exact = 1.0 / (1.0 + 161.0 / 619.0);
    EXPECT_LE(std::abs(r.purity - exact), std::abs(r.raw - exact) + 1e-12);
    EXPECT_LT(std::abs(r.raw - r.coarse), 0.05);
}

TEST(Purity, DensityMatrixIsAStateAndAgreesWithDenseOracle) {
    double const txx = 161, tx = 619;
    std::size_t const n = 256;
    double const t_max = purity_min_t_max(txx, tx);
    auto const rho = reduced_density_matrix(txx, tx, n, t_max);
    ASSERT_EQ(rho.rows(), static_cast<Eigen::Index>(n));
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    EXPECT_LT((rho - rho.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
    double const p = (rho * rho).trace();
    double const dense = dense_midpoint_purity(txx, tx, n, t_max);
    // h = 7.8 ps here.
    EXPECT_NEAR(p, dense, 5e-3);
    // The oracle is only first order (kink on the diagonal): halving h should
    // roughly halve its error.
    double const exact = 1.0 / (1.0 + txx / tx);
    double const finer = dense_midpoint_purity(txx, tx, 2 * n, t_max);
    EXPECT_LT(std::abs(finer - exact), 0.6 * std::abs(dense - exact));
}

TEST(Purity, ContractErrors) {
    EXPECT_THROW((void)purity_oracle(161, 619, 100), ContractError);
    EXPECT_THROW((void)purity_oracle(161, 619, 2047), ContractError);
    EXPECT_THROW((void)purity_oracle(161, 619, 2048, 100.0), ContractError);
    EXPECT_THROW((void)purity_oracle(0, 619), ContractError);
    EXPECT_THROW((void)purity_oracle(161, -1), ContractError);
}
