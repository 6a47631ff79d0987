#include "qdcascade/purity.hpp"

#include "qdcascade/errors.hpp"

#include <cmath>
#include <vector>

namespace qdcascade {

namespace {

// Integral of exp(-k t) over [lo, lo + h).
double intexp(double k, double lo, double h) {
    if (k == 0.0)
        return h;
    return std::exp(-k * lo) * -std::expm1(-k * h) / k;
}

// Cell integrals of the separable amplitude factors. With
// a = 1 / 2 tau_xx and b = 1 / 2 tau_x the amplitude is
// exp(-(a - b) t1) exp(-b t2) above the diagonal.
struct CellFactors {
    std::vector<double> f;       // int_i exp(-(a - b) t)
    std::vector<double> diag;    // int_{t1 < t2 in cell i} psi
    std::vector<double> suffix;  // sum_{j >= i} (int_j exp(-b t))^2, size n + 1
    std::vector<double> g;
};

CellFactors cell_factors(double tau_xx, double tau_x, std::size_t n, double t_max) {
    double const a = 0.5 / tau_xx;
    double const b = 0.5 / tau_x;
    double const c = a - b;
    double const h = t_max / static_cast<double>(n);
    CellFactors cf;
    cf.f.resize(n);
    cf.g.resize(n);
    cf.diag.resize(n);
    cf.suffix.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double const lo = static_cast<double>(i) * h;
        cf.f[i] = intexp(c, lo, h);
        cf.g[i] = intexp(b, lo, h);
        cf.diag[i] = (intexp(a, lo, h) - std::exp(-b * (lo + h)) * cf.f[i]) / b;
    }
    for (std::size_t i = n; i-- > 0;)
        cf.suffix[i] = cf.suffix[i + 1] + cf.g[i] * cf.g[i];
    return cf;
}

// Unnormalized rho(i, j) for i <= j.
double rho_entry(CellFactors const &cf, std::size_t i, std::size_t j) {
    if (i == j)
        return cf.diag[i] * cf.diag[i] + cf.f[i] * cf.f[i] * cf.suffix[i + 1];
    return cf.f[i] * cf.g[j] * cf.diag[j] + cf.f[i] * cf.f[j] * cf.suffix[j + 1];
}

void check_inputs(double tau_xx, double tau_x, std::size_t grid_n, double &t_max) {
    if (!(tau_xx > 0.0) || !(tau_x > 0.0))
        throw ContractError("purity: lifetimes must be positive");
    if (t_max <= 0.0)
        t_max = purity_min_t_max(tau_xx, tau_x);
    if (t_max < purity_min_t_max(tau_xx, tau_x) * (1.0 - 1e-12))
        throw ContractError("purity: t_max must be at least 10 (tau_xx + tau_x)");
    if (grid_n < 2)
        throw ContractError("purity: grid too small");
}

struct TracePair {
    double purity;
    double trace_error;
};

TracePair trace_rho_squared(double tau_xx, double tau_x, std::size_t n, double t_max) {
    auto const cf = cell_factors(tau_xx, tau_x, n, t_max);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        trace += rho_entry(cf, i, i);
    double sum_sq = 0.0;
    double norm_trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const d = rho_entry(cf, i, i) / trace;
        norm_trace += d;
        double row = d * d;
        for (std::size_t j = i + 1; j < n; ++j) {
            double const v = rho_entry(cf, i, j) / trace;
            row += 2.0 * v * v;
        }
        sum_sq += row;
    }
    return {sum_sq, std::abs(norm_trace - 1.0)};
}

} // namespace

Eigen::MatrixXd reduced_density_matrix(double tau_xx, double tau_x,
                                       std::size_t grid_n, double t_max) {
    check_inputs(tau_xx, tau_x, grid_n, t_max);
    auto const cf = cell_factors(tau_xx, tau_x, grid_n, t_max);
    auto const n = static_cast<Eigen::Index>(grid_n);
    Eigen::MatrixXd rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            double const v = rho_entry(cf, static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j));
            rho(i, j) = v;
            rho(j, i) = v;
        }
    }
    rho /= rho.trace();
    return rho;
}

PurityResult purity_oracle(double tau_xx, double tau_x, std::size_t grid_n,
                           double t_max) {
    check_inputs(tau_xx, tau_x, grid_n, t_max);
    if (grid_n < 256 || grid_n % 2 != 0)
        throw ContractError("purity: grid_n must be even and at least 256");

    auto const fine = trace_rho_squared(tau_xx, tau_x, grid_n, t_max);
    auto const coarse = trace_rho_squared(tau_xx, tau_x, grid_n / 2, t_max);

    // The cell projection has a first-order error in the cell size; one
    // Richardson step removes it.
    PurityResult out;
    out.raw = fine.purity;
    out.coarse = coarse.purity;
    out.purity = 2.0 * fine.purity - coarse.purity;
    out.trace_error = fine.trace_error;
    out.grid_n = grid_n;
    out.t_max = t_max;
    return out;
}

double purity_limit(double r) {
    if (!(r >= 0.0))
        throw ContractError("purity_limit: r must be non-negative");
    return 1.0 / (1.0 + r);
}

} // namespace qdcascade
