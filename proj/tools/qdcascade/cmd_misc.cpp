#include "commands.hpp"

#include "qdcascade/coherence.hpp"
#include "qdcascade/config.hpp"
#include "qdcascade/errors.hpp"
#include "qdcascade/reproduce.hpp"
#include "qdcascade/stark.hpp"
#include "qdcascade/units.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

namespace qdcascade::cli {

namespace {

std::string number(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// field-model ----------------------------------------------------------------

struct FieldArgs {
    double v_min = -2.2;
    double v_max = 1.0;
    double v_step = 0.05;
    int holes = 3;
    double eg = 1.73;
    double eph = 1.59;
};

int run_field_model(Context &ctx, FieldArgs const &a) {
    DiodeGeometry geom;
    TrapFieldModel trap;
    if (!ctx.global.config.empty()) {
        auto const config = Config::load(ctx.global.config);
        geom = make_diode(config);
        trap = make_trap(config);
    }
    if (!(a.v_step > 0.0) || a.v_max < a.v_min)
        throw UsageError("field-model: need v-min <= v-max and a positive step");
    if (!(a.v_max < geom.vb))
        throw UsageError("field-model: v-max must lie below the built-in voltage " +
                         number(geom.vb) + " V");
    if (a.holes < 0)
        throw UsageError("field-model: --holes must be non-negative");

    double const onset = franz_keldysh_onset(a.eg, a.eph, geom, trap);
    CsvTable t;
    t.columns = {"voltage_v", "fv_kv_cm", "delta_nm", "e1_mev"};
    for (int n = 0; n <= a.holes; ++n)
        t.columns.push_back("f_n" + std::to_string(n) + "_kv_cm");
    t.meta["onset_v"] = number(onset);
    t.meta["eg_ev"] = number(a.eg);
    t.meta["eph_ev"] = number(a.eph);
    t.meta["vb_v"] = number(geom.vb);
    t.meta["thickness_nm"] = number(geom.thickness);
    t.meta["epsilon_r"] = number(trap.epsilon_r);
    t.meta["m_hh"] = number(trap.m_hh);
    t.meta["image"] = trap.image == ImageCharge::none ? "none" : "grounded_plane";

    auto const count = static_cast<long>(std::floor((a.v_max - a.v_min) / a.v_step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
        double const v = a.v_min + static_cast<double>(i) * a.v_step;
        double const fv = capacitor_field(v, geom);
        auto const level = triangular_well(fv, trap);
        std::vector<double> row{v, units::v_per_nm_to_kv_per_cm(fv), level.delta_nm,
                                level.energy_mev};
        for (int n = 0; n <= a.holes; ++n)
            row.push_back(units::v_per_nm_to_kv_per_cm(replica_field(v, n, geom, trap).total));
        t.rows.push_back(std::move(row));
    }

    if (ctx.global.format_or(Format::csv) == Format::json) {
        Json j;
        j["onset_v"] = onset;
        j["columns"] = t.columns;
        j["rows"] = t.rows;
        emit(j.dump(2) + "\n", ctx.global.out, *ctx.out);
    } else {
        emit(format_csv(t), ctx.global.out, *ctx.out);
    }
    return exit_ok;
}

// reproduce ------------------------------------------------------------------

struct ReproduceArgs {
    std::string scenario;
    std::uint64_t pulses = 0;
    bool list = false;
};

int run_reproduce(Context &ctx, ReproduceArgs const &a) {
    auto const &known = reproduce_scenarios();
    if (a.list) {
        for (auto const &s : known)
            *ctx.out << s << '\n';
        return exit_ok;
    }
    if (a.scenario.empty())
        throw UsageError("reproduce: give a scenario identifier or --list");
    std::vector<std::string> ids;
    if (a.scenario == "all")
        ids = known;
    else if (std::find(known.begin(), known.end(), a.scenario) != known.end())
        ids = {a.scenario};
    else
        throw UsageError("reproduce: unknown scenario '" + a.scenario + "'");

    ReproduceOptions opt;
    if (ctx.global.seed)
        opt.seed = *ctx.global.seed;
    if (a.pulses > 0)
        opt.pulses = a.pulses;
    opt.threads = ctx.global.threads;

    bool pass = true;
    Json reports = Json::array();
    for (auto const &id : ids) {
        auto const r = reproduce(id, opt);
        pass = pass && r.pass();
        reports.push_back(Json::parse(report_to_json(r)));
        *ctx.err << id << ": " << (r.pass() ? "PASS" : "FAIL") << '\n';
    }
    auto const &doc = ids.size() == 1 ? reports.front() : reports;
    emit(doc.dump(2) + "\n", ctx.global.out, *ctx.out);
    return pass ? exit_ok : exit_analysis;
}

// plotdata -------------------------------------------------------------------

struct PlotArgs {
    std::string kind;
    std::string input;
    std::optional<double> vb;
    std::optional<double> thickness;
};

void require_columns(CsvTable const &t, std::string const &kind,
                     std::initializer_list<char const *> names) {
    for (auto const *n : names)
        if (!t.has_column(n))
            throw UsageError("plotdata: kind mismatch: '" + kind + "' input needs column '" +
                             n + "'");
}

int run_plotdata(Context &ctx, PlotArgs const &a) {
    auto const in = read_csv(a.input);
    CsvTable t;
    t.meta["kind"] = a.kind;
    t.meta["source"] = std::filesystem::path(a.input).filename().string();

    if (a.kind == "histogram") {
        require_columns(in, a.kind, {"delay_ps", "counts"});
        if (in.has_column("visibility") || in.has_column("energy_ev"))
            throw UsageError("plotdata: kind mismatch: input is not a histogram");
        auto const hist = histogram_from_table(in);
        t.meta["bin_width_ps"] = std::to_string(hist.bin_width);
        t.columns = {"delay_ns", "counts"};
        for (std::size_t i = 0; i < hist.size(); ++i)
            t.rows.push_back({static_cast<double>(hist.bin_center(i)) * 1e-3,
                              static_cast<double>(hist.counts[i])});
    } else if (a.kind == "stark") {
        require_columns(in, a.kind, {"energy_ev"});
        bool const by_voltage = in.has_column("voltage_v");
        if (!by_voltage && !in.has_column("field_kv_cm"))
            throw UsageError("plotdata: kind mismatch: 'stark' input needs voltage_v or "
                             "field_kv_cm");
        auto const geom = diode_from(ctx.global, a.vb, a.thickness);
        auto const xs = in.column_values(by_voltage ? "voltage_v" : "field_kv_cm");
        auto const es = in.column_values("energy_ev");
        std::vector<StarkPoint> pts;
        for (std::size_t i = 0; i < xs.size(); ++i)
            pts.push_back({by_voltage ? capacitor_field(xs[i], geom)
                                      : units::kv_per_cm_to_v_per_nm(xs[i]),
                           es[i], 0.0});
        auto const p = fit_stark_field(pts);
        t.meta["e0_ev"] = number(p.e0.value);
        t.meta["alpha_ev_nm_per_v"] = number(p.alpha.value);
        t.meta["beta_ev_nm2_per_v2"] = number(p.beta.value);
        t.columns = {by_voltage ? "V" : "F_kv_cm", "E_data", "E_fit"};
        for (std::size_t i = 0; i < pts.size(); ++i)
            t.rows.push_back({xs[i], es[i], stark_energy(p, pts[i].x)});
    } else {
        require_columns(in, a.kind, {"delay_ps", "visibility"});
        auto const d = in.column_values("delay_ps");
        auto const v = in.column_values("visibility");
        std::vector<CoherencePoint> pts;
        for (std::size_t i = 0; i < d.size(); ++i)
            pts.push_back({d[i], v[i], 0.0});
        auto const fit = fit_coherence(pts);
        t.meta["f_lorentz_uev"] = number(fit.f_lorentz.value);
        t.meta["f_gauss_uev"] = number(fit.f_gauss.value);
        t.columns = {"delay_ps", "v_data", "v_fit"};
        for (auto const &p : pts)
            t.rows.push_back({p.delay_ps, p.visibility, fit.envelope(p.delay_ps)});
    }
    emit(format_csv(t), ctx.global.out, *ctx.out);
    return exit_ok;
}

} // namespace

void add_field_model(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<FieldArgs>();
    auto *cmd = app.add_subcommand("field-model", "Tabulate diode and replica fields");
    cmd->add_option("--v-min", a->v_min, "First voltage, V")->capture_default_str();
    cmd->add_option("--v-max", a->v_max, "Last voltage, V")->capture_default_str();
    cmd->add_option("--v-step", a->v_step, "Voltage step, V")->capture_default_str();
    cmd->add_option("--holes", a->holes, "Largest trapped-hole number")->capture_default_str();
    cmd->add_option("--eg", a->eg, "Barrier band gap, eV")->capture_default_str();
    cmd->add_option("--eph", a->eph, "Laser photon energy, eV")->capture_default_str();
    cmd->callback([&ctx, a] { ctx.action = [&ctx, a] { return run_field_model(ctx, *a); }; });
}

void add_reproduce(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<ReproduceArgs>();
    auto *cmd = app.add_subcommand("reproduce", "Run a reference scenario with pass/fail checks");
    cmd->add_option("scenario", a->scenario, "Scenario identifier, or 'all'");
    cmd->add_option("--pulses", a->pulses, "Pulses for Monte Carlo scenarios");
    cmd->add_flag("--list", a->list, "List scenario identifiers");
    cmd->callback([&ctx, a] { ctx.action = [&ctx, a] { return run_reproduce(ctx, *a); }; });
}

void add_plotdata(CLI::App &app, Context &ctx) {
    auto a = std::make_shared<PlotArgs>();
    auto *cmd = app.add_subcommand("plotdata", "Plot-ready CSV from a histogram or fit input");
    cmd->add_option("--kind", a->kind, "histogram, stark or coherence")
        ->required()
        ->check(CLI::IsMember({"histogram", "stark", "coherence"}));
    cmd->add_option("--input", a->input, "Input CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--vb", a->vb, "Built-in voltage, V (stark)");
    cmd->add_option("--thickness", a->thickness, "Intrinsic thickness, nm (stark)");
    cmd->callback([&ctx, a] { ctx.action = [&ctx, a] { return run_plotdata(ctx, *a); }; });
}

} // namespace qdcascade::cli
