#include "commands.hpp"

#include "qdcascade/coherence.hpp"
#include "qdcascade/config.hpp"
#include "qdcascade/correlator.hpp"
#include "qdcascade/hom_analysis.hpp"
#include "qdcascade/lifetime_fit.hpp"
#include "qdcascade/stark.hpp"
#include "qdcascade/units.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <memory>
#include <ostream>

namespace qdcascade::cli {

namespace {

std::string render(Json const &report, Json const &parameters, Format fmt) {
    if (fmt == Format::csv)
        return format_csv(parameter_table(parameters));
    return report.dump(2) + "\n";
}

/// Writes the residual table next to --out (or to an explicit path) and
/// returns the path recorded in the report; null when nothing was written.
Json write_residuals(CsvTable const &table, std::string const &explicit_path,
                     std::string const &out) {
    std::filesystem::path path = explicit_path;
    if (path.empty())
        path = sibling(out, "_residuals.csv");
    if (path.empty())
        return nullptr;
    emit(format_csv(table), path.string(), std::cout);
    return path.string();
}

Measured g2_of(std::string const &path, Picoseconds period, Picoseconds half_width) {
    auto const hist = read_histogram_csv(path);
    auto const hw = half_width > 0 ? half_width : period / 4;
    return g2_from_peaks(integrate_peaks(hist, period, hw));
}

// fit-lifetime ---------------------------------------------------------------

struct LifetimeArgs {
    std::string input;
    std::string model = "bi";
    std::string irf;
    std::optional<double> irf_fwhm;
    std::optional<double> irf_center;
    bool float_irf = false;
    std::optional<double> tau_xx;
    double tau_xx_error = 0.0;
    double tau_xx_hint = 0.0;
    double count_floor = 0.0;
    std::optional<double> fit_lo;
    std::optional<double> fit_hi;
    std::string residuals;
};

char const *model_name(LifetimeModel m) {
    switch (m) {
    case LifetimeModel::mono:
        return "mono";
    case LifetimeModel::bi:
        return "bi";
    case LifetimeModel::bi_degenerate:
        return "bi_degenerate";
    }
    return "?";
}

int run_fit_lifetime(Context &ctx, LifetimeArgs const &a) {
    auto const hist = read_histogram_csv(a.input);
    LifetimeFitOptions opt;
    if (!a.irf.empty())
        opt.irf = IrfSpec::from_histogram(read_histogram_csv(a.irf));
    else if (a.irf_fwhm)
        opt.irf.fwhm = *a.irf_fwhm;
    else
        throw UsageError("fit-lifetime: give --irf or --irf-fwhm");
    if (a.irf_center)
        opt.irf.center = *a.irf_center;
    opt.irf.float_width = a.float_irf;
    opt.count_floor = a.count_floor;
    opt.fit_lo = a.fit_lo;
    opt.fit_hi = a.fit_hi;
    opt.tau_xx_hint = a.tau_xx_hint;
    if (a.tau_xx) {
        if (a.model != "bi")
            throw UsageError("fit-lifetime: --tau-xx applies to the bi model only");
        opt.tau_xx_constraint = Measured{*a.tau_xx, a.tau_xx_error};
    }
    auto const fit = a.model == "mono" ? fit_lifetime_mono(hist, opt) : fit_lifetime_bi(hist, opt);

    Json params = Json::object();
    for (std::size_t i = 0; i < fit.parameter_names.size(); ++i) {
        auto const k = static_cast<Eigen::Index>(i);
        params[fit.parameter_names[i]] =
            to_json(Measured{fit.parameters[k], std::sqrt(std::max(fit.covariance(k, k), 0.0))});
    }
    Json report;
    report["model"] = model_name(fit.model);
    report["tau_xx_ps"] = to_json(fit.tau_xx);
    report["tau_xx_fixed"] = fit.tau_xx_fixed;
    if (fit.tau_x) {
        report["tau_x_ps"] = to_json(*fit.tau_x);
        report["ratio"] = to_json(fit.ratio());
    }
    report["amplitude"] = to_json(fit.amplitude);
    report["offset_per_bin"] = to_json(fit.offset);
    report["t0_ps"] = to_json(fit.t0);
    report["irf_fwhm_ps"] = to_json(fit.irf_fwhm);
    report["bin_width_ps"] = fit.bin_width;
    report["parameters"] = params;
    report["covariance"] = to_json(fit.covariance);
    report["chi2"] = fit.chi2;
    report["dof"] = fit.dof;
    report["chi2_reduced"] = fit.chi2_red;
    report["iterations"] = fit.iterations;
    report["bins_used"] = fit.bins_used;

    CsvTable res;
    res.columns = {"delay_ps", "counts", "model", "residual", "pull"};
    for (std::size_t i = 0; i < hist.size(); ++i) {
        double const t = static_cast<double>(hist.bin_center(i));
        if ((a.fit_lo && t < *a.fit_lo) || (a.fit_hi && t > *a.fit_hi))
            continue;
        double const y = static_cast<double>(hist.counts[i]);
        double const m = fit.model_value(t);
        res.rows.push_back({t, y, m, y - m, (y - m) / std::sqrt(std::max(y, 1.0))});
    }
    report["residuals"] = write_residuals(res, a.residuals, ctx.global.out);
    emit(render(report, params, ctx.global.format_or(Format::json)), ctx.global.out, *ctx.out);
    return exit_ok;
}

// fit-stark ------------------------------------------------------------------

struct StarkArgs {
    std::string input;
    std::optional<double> vb;
    std::optional<double> thickness;
    int charge = 1;
    std::string residuals;
};

int run_fit_stark(Context &ctx, StarkArgs const &a) {
    auto const table = read_csv(a.input);
    bool const by_voltage = table.has_column("voltage_v");
    if (!by_voltage && !table.has_column("field_kv_cm"))
        throw UsageError("fit-stark: input needs a voltage_v or field_kv_cm column");
    auto const geom = diode_from(ctx.global, a.vb, a.thickness);
    auto const xs = table.column_values(by_voltage ? "voltage_v" : "field_kv_cm");
    auto const es = table.column_values("energy_ev");
    std::vector<double> sig(xs.size(), 0.0);
    if (table.has_column("sigma_ev"))
        sig = table.column_values("sigma_ev");
    std::vector<StarkPoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double const f = by_voltage ? capacitor_field(xs[i], geom)
                                    : units::kv_per_cm_to_v_per_nm(xs[i]);
        pts.push_back({f, es[i], sig[i]});
    }
    auto p = fit_stark_field(pts);
    p.charge = a.charge;

    Json params = {{"e0_ev", to_json(p.e0)},
                   {"alpha_ev_nm_per_v", to_json(p.alpha)},
                   {"beta_ev_nm2_per_v2", to_json(p.beta)}};
    Json report;
    report["parameters"] = params;
    report["charge"] = p.charge;
    report["beta_per_charge_nm2_per_v"] = to_json(p.beta_per_charge());
    double const fv = stark_vertex_field(p);
    report["vertex_field_kv_cm"] = units::v_per_nm_to_kv_per_cm(fv);
    report["vertex_voltage_v"] = voltage_for_field(fv, geom);
    report["diode"] = {{"vb_v", geom.vb}, {"thickness_nm", geom.thickness}};
    report["covariance"] = to_json(Eigen::MatrixXd(p.covariance));
    report["chi2"] = p.chi2;
    report["dof"] = p.dof;

    CsvTable res;
    if (by_voltage)
        res.columns.push_back("voltage_v");
    for (auto const *c : {"field_kv_cm", "energy_ev", "fit_ev", "residual_uev"})
        res.columns.push_back(c);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double const fit = stark_energy(p, pts[i].x);
        std::vector<double> row{units::v_per_nm_to_kv_per_cm(pts[i].x), es[i], fit,
                                (es[i] - fit) * 1e6};
        if (by_voltage)
            row.insert(row.begin(), xs[i]);
        res.rows.push_back(std::move(row));
    }
    report["residuals"] = write_residuals(res, a.residuals, ctx.global.out);
    emit(render(report, params, ctx.global.format_or(Format::json)), ctx.global.out, *ctx.out);
    return exit_ok;
}

// fit-michelson --------------------------------------------------------------

struct MichelsonArgs {
    std::string input;
    std::optional<double> wavelength;
    std::optional<double> tau_x;
    std::optional<double> tau_xx;
    std::string residuals;
};

int run_fit_michelson(Context &ctx, MichelsonArgs const &a) {
    auto const table = read_csv(a.input);
    std::vector<CoherencePoint> pts;
    Json fringes = Json::array();
    if (table.has_column("visibility")) {
        auto const d = table.column_values("delay_ps");
        auto const v = table.column_values("visibility");
        std::vector<double> s(d.size(), 0.0);
        if (table.has_column("sigma"))
            s = table.column_values("sigma");
        for (std::size_t i = 0; i < d.size(); ++i)
            pts.push_back({d[i], v[i], s[i]});
    } else {
        double lambda = 0.0;
        if (a.wavelength)
            lambda = *a.wavelength;
        else if (auto it = table.meta.find("wavelength_nm"); it != table.meta.end())
            lambda = std::stod(it->second);
        else
            throw UsageError("fit-michelson: no wavelength_nm metadata; pass --wavelength");
        auto const delay = table.column_values("delay_ps");
        auto const x = table.column_values("position_nm");
        auto const y = table.column_values("intensity");
        std::size_t i = 0;
        while (i < delay.size()) {
            std::vector<FringeSample> samples;
            std::size_t j = i;
            for (; j < delay.size() && delay[j] == delay[i]; ++j)
                samples.push_back({x[j], y[j]});
            auto const f = fit_fringe(samples, lambda);
            pts.push_back({delay[i], f.visibility, 0.0});
            fringes.push_back({{"delay_ps", delay[i]},
                               {"visibility", f.visibility},
                               {"phase", f.phase},
                               {"i0", f.i0},
                               {"residual_rms", f.residual_rms}});
            i = j;
        }
    }
    std::optional<double> gamma0;
    if (a.tau_x)
        gamma0 = a.tau_xx ? transform_limit(*a.tau_x, *a.tau_xx).second
                          : transform_limit(*a.tau_x).first;
    else if (a.tau_xx)
        throw UsageError("fit-michelson: --tau-xx needs --tau-x");
    auto const fit = fit_coherence(pts, gamma0);

    Json params = {{"f_lorentz_uev", to_json(fit.f_lorentz)},
                   {"f_gauss_uev", to_json(fit.f_gauss)},
                   {"gamma_uev", to_json(fit.gamma)}};
    if (fit.ratio)
        params["gamma_over_gamma0"] = to_json(*fit.ratio);
    Json report;
    report["parameters"] = params;
    if (fit.gamma0)
        report["gamma0_uev"] = *fit.gamma0;
    report["covariance_fl_fg2"] = to_json(Eigen::MatrixXd(fit.covariance));
    report["chi2"] = fit.chi2;
    report["dof"] = fit.dof;
    if (!fringes.empty())
        report["fringes"] = fringes;

    CsvTable res;
    res.columns = {"delay_ps", "visibility", "sigma", "v_fit", "residual"};
    for (auto const &p : pts) {
        double const m = fit.envelope(p.delay_ps);
        res.rows.push_back({p.delay_ps, p.visibility, p.sigma, m, p.visibility - m});
    }
    report["residuals"] = write_residuals(res, a.residuals, ctx.global.out);
    emit(render(report, params, ctx.global.format_or(Format::json)), ctx.global.out, *ctx.out);
    return exit_ok;
}

// analyze-hom / analyze-g2 ---------------------------------------------------

struct PeakArgs {
    Picoseconds period = 12'500;
    Picoseconds half_width = 0;
};

struct HomArgs {
    std::string co;
    std::string cross;
    PeakArgs peaks;
    std::optional<double> g2;
    double g2_error = 0.0;
    std::string g2_hist;
    double nu = 1.0;
};

int run_analyze_hom(Context &ctx, HomArgs const &a) {
    auto const hw = a.peaks.half_width > 0 ? a.peaks.half_width : a.peaks.period / 4;
    auto const co = integrate_peaks(read_histogram_csv(a.co), a.peaks.period, hw);
    auto const cross = integrate_peaks(read_histogram_csv(a.cross), a.peaks.period, hw);
    Measured g2{0.0, 0.0};
    if (a.g2 && !a.g2_hist.empty())
        throw UsageError("analyze-hom: --g2 and --g2-hist are exclusive");
    if (a.g2)
        g2 = {*a.g2, a.g2_error};
    else if (!a.g2_hist.empty())
        g2 = g2_of(a.g2_hist, a.peaks.period, a.peaks.half_width);
    auto const rec = make_visibility_record(normalize_center(co), normalize_center(cross), g2, a.nu);

    Json params = {{"v_raw", to_json(rec.v_raw)},
                   {"v_corr", to_json(rec.v_corr)},
                   {"g2", to_json(rec.g2)},
                   {"a_co", to_json(rec.a_co)},
                   {"a_cross", to_json(rec.a_cross)}};
    Json report;
    report["parameters"] = params;
    report["nu"] = rec.nu;
    report["peaks_co"] = peaks_json(co);
    report["peaks_cross"] = peaks_json(cross);
    emit(render(report, params, ctx.global.format_or(Format::json)), ctx.global.out, *ctx.out);
    return exit_ok;
}

int run_analyze_g2(Context &ctx, std::string const &input, PeakArgs const &a) {
    auto const hw = a.half_width > 0 ? a.half_width : a.period / 4;
    auto const peaks = integrate_peaks(read_histogram_csv(input), a.period, hw);
    Json params = {{"g2", to_json(g2_from_peaks(peaks))}};
    Json report;
    report["parameters"] = params;
    report["peaks"] = peaks_json(peaks);
    emit(render(report, params, ctx.global.format_or(Format::json)), ctx.global.out, *ctx.out);
    return exit_ok;
}

void add_peak_options(CLI::App *cmd, PeakArgs &p) {
    cmd->add_option("--period", p.period, "Laser period, ps")->capture_default_str();
    cmd->add_option("--half-width", p.half_width, "Peak half-width, ps (0: period/4)");
}

template <class Args, class Fn>
void bind(CLI::App *cmd, Context &ctx, std::shared_ptr<Args> args, Fn fn) {
    cmd->callback([&ctx, args, fn] { ctx.action = [&ctx, args, fn] { return fn(ctx, *args); }; });
}

} // namespace

void add_fit_lifetime(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<LifetimeArgs>();
    auto *cmd = app.add_subcommand("fit-lifetime", "Fit a decay histogram");
    cmd->add_option("--input", a->input, "Histogram CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--model", a->model, "mono or bi")
        ->check(CLI::IsMember({"mono", "bi"}))
        ->capture_default_str();
    cmd->add_option("--irf", a->irf, "IRF histogram CSV")->check(CLI::ExistingFile);
    cmd->add_option("--irf-fwhm", a->irf_fwhm, "IRF FWHM, ps")->excludes("--irf");
    cmd->add_option("--irf-center", a->irf_center, "Expected zero delay, ps");
    cmd->add_flag("--float-irf", a->float_irf, "Fit the IRF width");
    cmd->add_option("--tau-xx", a->tau_xx, "Hold tau_xx at this value, ps (bi)");
    cmd->add_option("--tau-xx-error", a->tau_xx_error, "Error of the held tau_xx, ps");
    cmd->add_option("--tau-xx-hint", a->tau_xx_hint, "Expected tau_xx for labelling, ps");
    cmd->add_option("--count-floor", a->count_floor, "Mask bins below this count");
    cmd->add_option("--fit-lo", a->fit_lo, "Lower fit bound, ps");
    cmd->add_option("--fit-hi", a->fit_hi, "Upper fit bound, ps");
    cmd->add_option("--residuals", a->residuals, "Residual CSV path");
    bind(cmd, ctx, a, run_fit_lifetime);
}

void add_fit_stark(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<StarkArgs>();
    auto *cmd = app.add_subcommand("fit-stark", "Quadratic Stark fit of line energies");
    cmd->add_option("--input", a->input, "CSV: voltage_v|field_kv_cm, energy_ev[, sigma_ev]")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--vb", a->vb, "Built-in voltage, V");
    cmd->add_option("--thickness", a->thickness, "Intrinsic thickness, nm");
    cmd->add_option("--charge", a->charge, "Dipole charge in units of e")->capture_default_str();
    cmd->add_option("--residuals", a->residuals, "Residual CSV path");
    bind(cmd, ctx, a, run_fit_stark);
}

void add_fit_michelson(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<MichelsonArgs>();
    auto *cmd = app.add_subcommand("fit-michelson", "Fringe visibilities and Voigt linewidth");
    cmd->add_option("--input", a->input, "Fringe CSV or delay_ps,visibility CSV")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--wavelength", a->wavelength, "Wavelength, nm");
    cmd->add_option("--tau-x", a->tau_x, "X lifetime for the transform limit, ps");
    cmd->add_option("--tau-xx", a->tau_xx, "XX lifetime (XX line limit), ps");
    cmd->add_option("--residuals", a->residuals, "Residual CSV path");
    bind(cmd, ctx, a, run_fit_michelson);
}

void add_analyze_hom(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<HomArgs>();
    auto *cmd = app.add_subcommand("analyze-hom", "HOM visibility from co/cross histograms");
    cmd->add_option("--co", a->co, "Co-polarized histogram CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--cross", a->cross, "Cross-polarized histogram CSV")
        ->required()
        ->check(CLI::ExistingFile);
    add_peak_options(cmd, a->peaks);
    cmd->add_option("--g2", a->g2, "g2(0) for the correction");
    cmd->add_option("--g2-error", a->g2_error, "Error of --g2");
    cmd->add_option("--g2-hist", a->g2_hist, "HBT histogram CSV to take g2(0) from")
        ->check(CLI::ExistingFile);
    cmd->add_option("--nu", a->nu, "Classical interferometer visibility")->capture_default_str();
    bind(cmd, ctx, a, run_analyze_hom);
}

void add_analyze_g2(CLI::App &app, Context &ctx) {
    struct G2Args {
        std::string input;
        PeakArgs peaks;
    };
    auto a = std::make_shared<G2Args>();
    auto *cmd = app.add_subcommand("analyze-g2", "g2(0) from an HBT histogram");
    cmd->add_option("--input", a->input, "Histogram CSV")->required()->check(CLI::ExistingFile);
    add_peak_options(cmd, a->peaks);
    bind(cmd, ctx, a,
         [](Context &c, G2Args const &g) { return run_analyze_g2(c, g.input, g.peaks); });
}

} // namespace qdcascade::cli
