#include "qdcascade/lifetime_fit.hpp"

#include "qdcascade/errors.hpp"
#include "qdcascade/units.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>

namespace qdcascade {

double erfcx(double z) {
    if (z < 25.0) {
        if (z < -26.0)
            return std::numeric_limits<double>::infinity();
        return std::exp(z * z) * std::erfc(z);
    }
    // Asymptotic series; truncation error below 1e-12 relative for z >= 25.
    double const iz2 = 1.0 / (z * z);
    double const series =
        1.0 + iz2 * (-0.5 + iz2 * (0.75 + iz2 * (-1.875 + iz2 * 6.5625)));
    return series / (z * std::sqrt(std::numbers::pi));
}

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;
double const inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// h = exp(-lambda t) theta(t) (x) G_sigma and its partial derivatives.
struct ExpGauss {
    double h = 0.0;
    double d_lambda = 0.0;
    double d_t = 0.0;
    double d_sigma = 0.0;
    double phi = 0.0;  // standard normal density at t / sigma
};

ExpGauss exp_gauss_terms(double t, double lambda, double sigma) {
    ExpGauss g;
    if (sigma <= 0.0) {
        if (t > 0.0) {
            g.h = std::exp(-lambda * t);
        } else if (t == 0.0) {
            g.h = 0.5;
        }
        g.d_lambda = -t * g.h;
        g.d_t = -lambda * g.h;
        return g;
    }
    double const x = t / sigma;
    double const z = (lambda * sigma - x) / sqrt2;
    g.phi = std::exp(-0.5 * x * x) * inv_sqrt_2pi;
    if (z >= 0.0)
        g.h = 0.5 * std::exp(-0.5 * x * x) * erfcx(z);
    else
        g.h = 0.5 * std::exp(0.5 * lambda * lambda * sigma * sigma - lambda * t) *
              std::erfc(z);
    g.d_lambda = -((t - lambda * sigma * sigma) * g.h + sigma * g.phi);
    g.d_t = -lambda * g.h + g.phi / sigma;
    g.d_sigma = g.h * lambda * lambda * sigma - g.phi * (lambda + t / (sigma * sigma));
    return g;
}

struct DataSet {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> w;
    double bin_width = 1.0;
};

DataSet prepare(CoincidenceHistogram const &hist, LifetimeFitOptions const &opt) {
    if (hist.counts.empty())
        throw EmptyInputError("lifetime fit: empty histogram");
    DataSet d;
    d.bin_width = static_cast<double>(hist.bin_width);
    for (std::size_t i = 0; i < hist.size(); ++i) {
        double const t = static_cast<double>(hist.bin_center(i));
        double const y = static_cast<double>(hist.counts[i]);
        if (opt.fit_lo && t < *opt.fit_lo)
            continue;
        if (opt.fit_hi && t > *opt.fit_hi)
            continue;
        if (y < opt.count_floor)
            continue;
        d.t.push_back(t);
        d.y.push_back(y);
        d.w.push_back(1.0 / std::sqrt(std::max(y, 1.0)));
    }
    if (d.t.size() < 8)
        throw FitError("lifetime fit: fewer than 8 usable bins");
    return d;
}

enum class Kind { mono, bi, degenerate };

// Parameter layout:
//   mono, degenerate: A, tau, t0, c [, sigma]
//   bi:               A, tau_a, tau_b, t0, c [, sigma]
//   bi, fixed tau_xx: A, tau_x, t0, c [, sigma]
struct Model {
    Kind kind = Kind::mono;
    bool float_sigma = false;
    double sigma = 0.0;
    std::optional<double> fixed_tau;
    double bin_width = 1.0;

    [[nodiscard]] Eigen::Index n_params() const {
        Eigen::Index n = 4;
        if (kind == Kind::bi && !fixed_tau)
            n = 5;
        return n + (float_sigma ? 1 : 0);
    }

    [[nodiscard]] Eigen::Index tau_count() const {
        return kind == Kind::bi && !fixed_tau ? 2 : 1;
    }

    [[nodiscard]] std::vector<std::string> names() const {
        std::vector<std::string> n{"amplitude"};
        if (kind == Kind::bi && !fixed_tau) {
            n.insert(n.end(), {"tau_a", "tau_b"});
        } else if (kind == Kind::bi) {
            n.push_back("tau_x");
        } else {
            n.push_back("tau");
        }
        n.insert(n.end(), {"t0", "offset"});
        if (float_sigma)
            n.push_back("sigma");
        return n;
    }

    // Value at delay t; fills grad (size n_params) when non-null.
    double eval(Eigen::VectorXd const &p, double t, double *grad) const {
        Eigen::Index const nt = tau_count();
        double const amp = p[0];
        double const t0 = p[1 + nt];
        double const c = p[2 + nt];
        double const sig = float_sigma ? p[3 + nt] : sigma;
        double const s = t - t0;
        double const abw = amp * bin_width;

        if (kind == Kind::mono || kind == Kind::degenerate) {
            double const tau = p[1];
            double const lam = 1.0 / tau;
            auto const g = exp_gauss_terms(s, lam, sig);
            if (kind == Kind::mono) {
                double const f = lam * g.h;
                if (grad) {
                    grad[0] = bin_width * f;
                    grad[1] = abw * (g.h + lam * g.d_lambda) * (-lam * lam);
                    grad[2] = -abw * lam * g.d_t;
                    grad[3] = 1.0;
                    if (float_sigma)
                        grad[4] = abw * lam * g.d_sigma;
                }
                return abw * f + c;
            }
            // Degenerate cascade: lambda^2 (t e^{-lambda t}) (x) G.
            double const k = -g.d_lambda;
            double const dk_dl = -sig * sig * g.h - (s - lam * sig * sig) * k;
            double const dk_dt = g.h - lam * k;
            double const dk_ds = k * lam * lam * sig - 2.0 * g.h * lam * sig + g.phi;
            double const f = lam * lam * k;
            if (grad) {
                grad[0] = bin_width * f;
                grad[1] = abw * (2.0 * lam * k + lam * lam * dk_dl) * (-lam * lam);
                grad[2] = -abw * lam * lam * dk_dt;
                grad[3] = 1.0;
                if (float_sigma)
                    grad[4] = abw * lam * lam * dk_ds;
            }
            return abw * f + c;
        }

        double const tau_a = fixed_tau ? *fixed_tau : p[1];
        double const tau_b = fixed_tau ? p[1] : p[2];
        double const l1 = 1.0 / tau_a;
        double const l2 = 1.0 / tau_b;
        auto const g1 = exp_gauss_terms(s, l1, sig);
        auto const g2 = exp_gauss_terms(s, l2, sig);
        double const dl = l1 - l2;
        double const kk = l1 * l2 / dl;
        double const diff = g2.h - g1.h;
        if (grad) {
            double const dk1 = -l2 * l2 / (dl * dl);
            double const dk2 = l1 * l1 / (dl * dl);
            double const df_dl1 = abw * (dk1 * diff - kk * g1.d_lambda);
            double const df_dl2 = abw * (dk2 * diff + kk * g2.d_lambda);
            grad[0] = bin_width * kk * diff;
            if (fixed_tau) {
                grad[1] = df_dl2 * (-l2 * l2);
            } else {
                grad[1] = df_dl1 * (-l1 * l1);
                grad[2] = df_dl2 * (-l2 * l2);
            }
            grad[1 + nt] = -abw * kk * (g2.d_t - g1.d_t);
            grad[2 + nt] = 1.0;
            if (float_sigma)
                grad[3 + nt] = abw * kk * (g2.d_sigma - g1.d_sigma);
        }
        return abw * kk * diff + c;
    }

    [[nodiscard]] bool feasible(Eigen::VectorXd const &p) const {
        Eigen::Index const nt = tau_count();
        for (Eigen::Index i = 1; i <= nt; ++i) {
            if (!(p[i] > 0.0) || !std::isfinite(p[i]))
                return false;
        }
        if (nt == 2 && p[1] == p[2])
            return false;
        if (fixed_tau && p[1] == *fixed_tau)
            return false;
        if (!(p[0] > 0.0))
            return false;
        if (float_sigma && !(p[3 + nt] > 0.0))
            return false;
        return true;
    }
};

Eigen::VectorXd start_vector(Model const &model, std::initializer_list<double> values) {
    Eigen::VectorXd p(model.n_params());
    Eigen::Index i = 0;
    for (double v : values)
        p[i++] = v;
    if (model.float_sigma)
        p[i] = model.sigma;
    return p;
}

LmResult run_weighted(Model const &model, DataSet const &d, Eigen::VectorXd p0,
                      LmOptions lm) {
    auto const n = static_cast<Eigen::Index>(d.t.size());
    auto const np = model.n_params();
    std::vector<double> grad(static_cast<std::size_t>(np));
    auto residual = [&](Eigen::VectorXd const &p, Eigen::VectorXd &r,
                        Eigen::MatrixXd *jac) {
        for (Eigen::Index i = 0; i < n; ++i) {
            auto const ui = static_cast<std::size_t>(i);
            double const f = model.eval(p, d.t[ui], jac ? grad.data() : nullptr);
            r[i] = (d.y[ui] - f) * d.w[ui];
            if (jac) {
                for (Eigen::Index j = 0; j < np; ++j)
                    (*jac)(i, j) = -grad[static_cast<std::size_t>(j)] * d.w[ui];
            }
        }
    };
    if (!lm.feasible)
        lm.feasible = [&model](Eigen::VectorXd const &p) { return model.feasible(p); };
    return levenberg_marquardt(residual, std::move(p0), n, lm);
}

// Weights 1/sqrt(y) bias low-count bins downwards. Refitting with weights
// 1/sqrt(model) until the parameters settle solves the Poisson likelihood
// equations; the final J^T W J is then the Fisher information.
LmResult run_fit(Model const &model, DataSet d, Eigen::VectorXd p0, LmOptions const &lm) {
    constexpr int max_reweights = 10;
    constexpr double min_expected = 1e-3;
    auto res = run_weighted(model, d, std::move(p0), lm);
    for (int it = 0; it < max_reweights; ++it) {
        for (std::size_t i = 0; i < d.t.size(); ++i)
            d.w[i] = 1.0 / std::sqrt(std::max(model.eval(res.params, d.t[i], nullptr),
                                              min_expected));
        auto next = run_weighted(model, d, res.params, lm);
        bool settled = true;
        for (Eigen::Index j = 0; j < next.params.size(); ++j) {
            double const step = std::abs(next.params[j] - res.params[j]);
            if (step > 1e-6 * std::sqrt(next.covariance(j, j)))
                settled = false;
        }
        res = std::move(next);
        if (settled)
            break;
    }
    return res;
}

struct Guess {
    double offset;
    double t0;
    double mean_delay;  // mean decay time after t0
    double area;
};

Guess initial_guess(DataSet const &d, IrfSpec const &irf) {
    Guess g{};
    std::vector<double> sorted = d.y;
    std::sort(sorted.begin(), sorted.end());
    g.offset = sorted[sorted.size() / 10];
    auto const peak = static_cast<std::size_t>(
        std::max_element(d.y.begin(), d.y.end()) - d.y.begin());
    double const peak_height = d.y[peak] - g.offset;
    if (std::isfinite(irf.center)) {
        g.t0 = irf.center;
    } else {
        std::size_t i = peak;
        while (i > 0 && d.y[i - 1] - g.offset > 0.1 * peak_height)
            --i;
        g.t0 = d.t[i];
    }
    double sw = 0.0;
    double swt = 0.0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        double const excess = d.y[i] - g.offset;
        if (d.t[i] < g.t0 || excess <= 0.0)
            continue;
        sw += excess;
        swt += excess * (d.t[i] - g.t0);
    }
    g.area = std::max(sw, 1.0);
    g.mean_delay = sw > 0.0 ? std::max(swt / sw, 2.0 * d.bin_width) : 100.0;
    return g;
}

double irf_sigma(IrfSpec const &irf, double bin_width) {
    if (!(irf.fwhm >= 0.0))
        throw ContractError("lifetime fit: IRF FWHM must be non-negative");
    double sigma = irf.fwhm / units::gaussian_fwhm_per_sigma;
    if (irf.float_width && sigma <= 0.0)
        sigma = bin_width;
    return sigma;
}

void fill_common(LifetimeFit &out, Model const &model, LmResult const &res,
                 DataSet const &d) {
    auto const nt = model.tau_count();
    out.amplitude = {res.params[0], res.error(0)};
    out.t0 = {res.params[1 + nt], res.error(1 + nt)};
    out.offset = {res.params[2 + nt], res.error(2 + nt)};
    if (model.float_sigma) {
        out.irf_fwhm = {res.params[3 + nt] * units::gaussian_fwhm_per_sigma,
                        res.error(3 + nt) * units::gaussian_fwhm_per_sigma};
    } else {
        out.irf_fwhm = {model.sigma * units::gaussian_fwhm_per_sigma, 0.0};
    }
    out.bin_width = d.bin_width;
    out.chi2 = res.chi2;
    out.dof = static_cast<long>(res.dof);
    out.chi2_red = res.chi2_reduced();
    out.iterations = res.iterations;
    out.bins_used = d.t.size();
    out.parameter_names = model.names();
    out.parameters = res.params;
    out.covariance = res.covariance;
}

LifetimeFit fit_degenerate(DataSet const &d, Model model, Guess const &g,
                           LmOptions const &lm) {
    model.kind = Kind::degenerate;
    model.fixed_tau.reset();
    auto const p0 = start_vector(model, {g.area, 0.5 * g.mean_delay, g.t0, g.offset});
    auto const res = run_fit(model, d, p0, lm);
    LifetimeFit out;
    out.model = LifetimeModel::bi_degenerate;
    out.tau_xx = {res.params[1], res.error(1)};
    out.tau_x = out.tau_xx;
    fill_common(out, model, res, d);
    return out;
}

// Reorders tau_a / tau_b so that index 1 holds tau_xx.
void swap_taus(LmResult &res) {
    std::swap(res.params[1], res.params[2]);
    res.covariance.row(1).swap(res.covariance.row(2));
    res.covariance.col(1).swap(res.covariance.col(2));
}

} // namespace

double exp_gauss(double t, double tau, double sigma) {
    if (!(tau > 0.0))
        throw ContractError("exp_gauss: tau must be positive");
    return exp_gauss_terms(t, 1.0 / tau, sigma).h;
}

IrfEstimate fit_irf_gaussian(CoincidenceHistogram const &irf) {
    double n = 0.0;
    double s1 = 0.0;
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < irf.size(); ++i) {
        double const c = static_cast<double>(irf.counts[i]);
        if (c > 0.0)
            ++occupied;
        n += c;
        s1 += c * static_cast<double>(irf.bin_center(i));
    }
    if (n <= 0.0)
        throw EmptyInputError("IRF histogram has no counts");
    double const mean = s1 / n;
    double s2 = 0.0;
    for (std::size_t i = 0; i < irf.size(); ++i) {
        double const dt = static_cast<double>(irf.bin_center(i)) - mean;
        s2 += static_cast<double>(irf.counts[i]) * dt * dt;
    }
    double const sd = std::sqrt(s2 / n);

    IrfEstimate out;
    out.area = n;
    if (occupied < 3) {
        out.center = {mean, sd / std::sqrt(n)};
        out.fwhm = {sd * units::gaussian_fwhm_per_sigma, 0.0};
        return out;
    }

    DataSet d;
    d.bin_width = static_cast<double>(irf.bin_width);
    for (std::size_t i = 0; i < irf.size(); ++i) {
        double const t = static_cast<double>(irf.bin_center(i));
        if (std::abs(t - mean) > 8.0 * sd + 2.0 * d.bin_width)
            continue;
        double const y = static_cast<double>(irf.counts[i]);
        d.t.push_back(t);
        d.y.push_back(y);
        d.w.push_back(1.0 / std::sqrt(std::max(y, 1.0)));
    }
    auto const m = static_cast<Eigen::Index>(d.t.size());
    auto residual = [&](Eigen::VectorXd const &p, Eigen::VectorXd &r,
                        Eigen::MatrixXd *jac) {
        for (Eigen::Index i = 0; i < m; ++i) {
            auto const ui = static_cast<std::size_t>(i);
            double const x = (d.t[ui] - p[1]) / p[2];
            double const gauss = std::exp(-0.5 * x * x) * inv_sqrt_2pi / p[2];
            double const f = p[0] * d.bin_width * gauss;
            r[i] = (d.y[ui] - f) * d.w[ui];
            if (jac) {
                (*jac)(i, 0) = -d.bin_width * gauss * d.w[ui];
                (*jac)(i, 1) = -f * x / p[2] * d.w[ui];
                (*jac)(i, 2) = -f * (x * x - 1.0) / p[2] * d.w[ui];
            }
        }
    };
    LmOptions lm;
    lm.feasible = [](Eigen::VectorXd const &p) { return p[0] > 0.0 && p[2] > 0.0; };
    Eigen::VectorXd p0(3);
    p0 << n, mean, std::max(sd, 0.3 * d.bin_width);
    auto const res = levenberg_marquardt(residual, p0, m, lm);
    out.center = {res.params[1], res.error(1)};
    out.fwhm = {res.params[2] * units::gaussian_fwhm_per_sigma,
                res.error(2) * units::gaussian_fwhm_per_sigma};
    out.area = res.params[0];
    return out;
}

IrfSpec IrfSpec::from_histogram(CoincidenceHistogram const &irf) {
    auto const est = fit_irf_gaussian(irf);
    IrfSpec spec;
    spec.fwhm = est.fwhm.value;
    spec.center = est.center.value;
    return spec;
}

Measured LifetimeFit::ratio() const {
    if (!tau_x)
        throw ContractError("lifetime ratio needs a biexponential fit");
    double const a = tau_xx.value;
    double const b = tau_x->value;
    double const r = a / b;
    if (model == LifetimeModel::bi_degenerate)
        return {1.0, 0.0};
    if (tau_xx_fixed) {
        // Independent errors: the constraint and the fitted tau_x.
        return qdcascade::ratio(tau_xx, *tau_x);
    }
    // Full covariance of (tau_xx, tau_x) at parameter indices 1 and 2.
    double const var = covariance(1, 1) / (b * b) + covariance(2, 2) * a * a / (b * b * b * b) -
                       2.0 * covariance(1, 2) * a / (b * b * b);
    return {r, std::sqrt(std::max(var, 0.0))};
}

double LifetimeFit::model_value(double t) const {
    double const sigma = irf_fwhm.value / units::gaussian_fwhm_per_sigma;
    double const s = t - t0.value;
    double const abw = amplitude.value * bin_width;
    switch (model) {
    case LifetimeModel::mono: {
        double const lam = 1.0 / tau_xx.value;
        return abw * lam * exp_gauss_terms(s, lam, sigma).h + offset.value;
    }
    case LifetimeModel::bi_degenerate: {
        double const lam = 1.0 / tau_xx.value;
        return abw * lam * lam * -exp_gauss_terms(s, lam, sigma).d_lambda + offset.value;
    }
    case LifetimeModel::bi: {
        double const l1 = 1.0 / tau_xx.value;
        double const l2 = 1.0 / tau_x->value;
        double const diff =
            exp_gauss_terms(s, l2, sigma).h - exp_gauss_terms(s, l1, sigma).h;
        return abw * l1 * l2 / (l1 - l2) * diff + offset.value;
    }
    }
    return 0.0;
}

LifetimeFit fit_lifetime_mono(CoincidenceHistogram const &hist,
                              LifetimeFitOptions const &options) {
    auto const d = prepare(hist, options);
    Model model;
    model.kind = Kind::mono;
    model.bin_width = d.bin_width;
    model.sigma = irf_sigma(options.irf, d.bin_width);
    model.float_sigma = options.irf.float_width;
    auto const g = initial_guess(d, options.irf);

    auto const p0 = start_vector(model, {g.area, g.mean_delay, g.t0, g.offset});
    auto const res = run_fit(model, d, p0, options.lm);

    LifetimeFit out;
    out.model = LifetimeModel::mono;
    out.tau_xx = {res.params[1], res.error(1)};
    fill_common(out, model, res, d);
    return out;
}

LifetimeFit fit_lifetime_bi(CoincidenceHistogram const &hist,
                            LifetimeFitOptions const &options) {
    auto const d = prepare(hist, options);
    Model model;
    model.kind = Kind::bi;
    model.bin_width = d.bin_width;
    model.sigma = irf_sigma(options.irf, d.bin_width);
    model.float_sigma = options.irf.float_width;
    auto const g = initial_guess(d, options.irf);

    if (options.tau_xx_constraint) {
        double const fixed = options.tau_xx_constraint->value;
        if (!(fixed > 0.0))
            throw ContractError("lifetime fit: tau_xx constraint must be positive");
        model.fixed_tau = fixed;
        auto const p0 = start_vector(
            model, {g.area, std::max(g.mean_delay - fixed, 2.0 * fixed), g.t0, g.offset});
        auto const res = run_fit(model, d, p0, options.lm);
        LifetimeFit out;
        out.model = LifetimeModel::bi;
        out.tau_xx_fixed = true;
        out.tau_xx = *options.tau_xx_constraint;
        out.tau_x = Measured{res.params[1], res.error(1)};
        fill_common(out, model, res, d);
        return out;
    }

    // The model is symmetric in the two time constants; several splits of
    // the mean delay guard against the saddle at tau_a = tau_b.
    std::optional<LmResult> best;
    for (double split : {0.2, 0.35, 0.1}) {
        auto const p0 = start_vector(model, {g.area, split * g.mean_delay,
                                             (1.0 - split) * g.mean_delay, g.t0,
                                             g.offset});
        try {
            auto res = run_fit(model, d, p0, options.lm);
            if (!best || res.chi2 < best->chi2)
                best = std::move(res);
        } catch (FitError const &) {
        }
    }

    if (best) {
        double const ta = best->params[1];
        double const tb = best->params[2];
        if (std::abs(ta - tb) / std::max(ta, tb) < options.degenerate_tolerance)
            best.reset();
    }
    if (!best)
        return fit_degenerate(d, model, g, options.lm);

    double const ta = best->params[1];
    double const tb = best->params[2];
    bool a_is_xx = ta < tb;
    if (options.tau_xx_hint > 0.0)
        a_is_xx = std::abs(ta - options.tau_xx_hint) <= std::abs(tb - options.tau_xx_hint);
    if (!a_is_xx)
        swap_taus(*best);

    LifetimeFit out;
    out.model = LifetimeModel::bi;
    out.tau_xx = {best->params[1], best->error(1)};
    out.tau_x = Measured{best->params[2], best->error(2)};
    fill_common(out, model, *best, d);
    out.parameter_names[1] = "tau_xx";
    out.parameter_names[2] = "tau_x";
    return out;
}

} // namespace qdcascade
