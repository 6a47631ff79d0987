#include "commands.hpp"

#include "qdcascade/config.hpp"
#include "qdcascade/interferometer.hpp"
#include "qdcascade/pipeline.hpp"
#include "qdcascade/tag_file.hpp"

#include <CLI11.hpp>

#include <memory>
#include <ostream>

namespace qdcascade::cli {

namespace {

char const *line_name(EmissionLine l) { return l == EmissionLine::xx ? "xx" : "x"; }

Json detector_json(DetectorModel const &d) {
    return Json{{"jitter_fwhm_ps", d.jitter_fwhm},
                {"efficiency", d.efficiency},
                {"dead_time_ps", d.dead_time}};
}

Json models_json(RunConfig const &run) {
    Json m;
    m["emitter"] = {{"tau_xx_ps", run.emitter.tau_xx},
                    {"tau_x_ps", run.emitter.tau_x},
                    {"p_exc", run.emitter.p_exc},
                    {"p_multi", run.emitter.p_multi},
                    {"background_rate_hz", run.emitter.background_rate}};
    m["laser"] = {{"rep_rate_hz", run.clock.rep_rate},
                  {"period_ps", run.clock.period},
                  {"jitter_fwhm_ps", run.clock.pulse_jitter_fwhm}};
    m["detectors"] = {{"xx", detector_json(run.detectors.xx)},
                      {"x", detector_json(run.detectors.x)},
                      {"sync", detector_json(run.detectors.sync)},
                      {"dark_rate_hz", run.dark_rate}};
    m["channels"] = {{"sync", run.channels.sync}, {"xx", run.channels.xx}, {"x", run.channels.x}};
    if (run.hbt_enabled)
        m["hbt"] = {{"line", line_name(run.hbt_line)}};
    if (run.hom.enabled) {
        auto const &b = run.hom.bench;
        m["hom"] = {{"line", line_name(run.hom.line)},
                    {"delay_ps", b.delay},
                    {"nu", b.nu},
                    {"polarization", b.polarization == Polarization::co ? "co" : "cross"},
                    {"long_arm_probability", b.effective_long_probability()},
                    {"t_short", b.arm_transmissions.first},
                    {"t_long", b.arm_transmissions.second}};
    }
    if (run.michelson.enabled) {
        auto const &mi = run.michelson;
        m["michelson"] = {{"line", line_name(mi.line)},
                          {"f_lorentz_uev", mi.shape.f_lorentz},
                          {"f_gauss_uev", mi.shape.f_gauss},
                          {"center_ev", mi.shape.center},
                          {"positions_mm", mi.scan.coarse_positions_mm},
                          {"piezo_step_nm", mi.scan.piezo_step_nm},
                          {"steps", mi.scan.steps},
                          {"intensity", mi.scan.intensity},
                          {"noise", mi.scan.noise}};
    }
    return m;
}

CsvTable michelson_table(std::vector<FringeDataset> const &scans) {
    CsvTable t;
    t.columns = {"coarse_mm", "delay_ps", "position_nm", "intensity"};
    if (!scans.empty())
        t.meta["wavelength_nm"] = std::to_string(scans.front().wavelength_nm);
    for (auto const &d : scans)
        for (auto const &s : d.samples)
            t.rows.push_back({d.coarse_mm, d.delay_ps, s.position_nm, s.intensity});
    return t;
}

} // namespace

void add_simulate(CLI::App &app, Context &ctx) {
    auto pulses = std::make_shared<std::uint64_t>(0);
    auto sets = std::make_shared<std::vector<std::string>>();
    auto *cmd = app.add_subcommand("simulate", "Simulate a cascade run and write tag files");
    cmd->add_option("--pulses", *pulses, "Number of laser pulses (overrides the config)");
    cmd->add_option("--set", *sets, "Override a config entry, key=value (repeatable)");
    cmd->callback([&ctx, pulses, sets] {
        ctx.action = [&ctx, pulses, sets] {
            auto const &g = ctx.global;
            if (g.config.empty())
                throw UsageError("simulate: --config is required");
            auto config = Config::load(g.config);
            for (auto const &kv : *sets) {
                auto const eq = kv.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw UsageError("simulate: --set expects key=value, got '" + kv + "'");
                config.set(kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (g.seed)
                config.set("seed", std::to_string(*g.seed));
            if (*pulses > 0)
                config.set("simulation.pulses", std::to_string(*pulses));
            if (g.threads > 1)
                config.set("simulation.threads", std::to_string(g.threads));
            if (!g.out.empty())
                config.set("output.dir", g.out);
            auto const run = make_run_config(config);
            for (auto const &key : config.unused_keys())
                *ctx.err << "qdcascade: warning: unused config key '" << key << "'\n";

            std::filesystem::path const dir = run.output_dir;
            std::filesystem::create_directories(dir);
            SimulationOptions const sim{.chunk_pulses = 1u << 16, .threads = run.threads};

            auto emitter = run.emitter;
            emitter.background_rate += run.dark_rate;
            Json files = Json::array();
            auto add_tags = [&](std::string const &name, std::string const &kind,
                                TagStream const &tags) {
                auto const path = dir / name;
                auto const n = write_tags(tags, path, {.strict = true});
                files.push_back({{"name", name},
                                 {"kind", kind},
                                 {"records", n},
                                 {"sha256", sha256_file(path)}});
            };

            auto const tags = simulate_cascade(emitter, run.clock, run.detectors, run.pulses,
                                               run.seed, sim, run.channels);
            add_tags("sync.ctag", "sync", tags.sync);
            add_tags("xx.ctag", "xx", tags.xx);
            add_tags("x.ctag", "x", tags.x);

            if (run.hbt_enabled || run.hom.enabled) {
                auto const emission = emit_cascade(run.emitter, run.clock, run.pulses,
                                                   run.seed, sim);
                PipelineOptions popt;
                popt.bin_width = run.bin_width;
                popt.window = run.window;
                popt.dark_rate = run.emitter.background_rate + run.dark_rate;
                popt.threads = run.threads;
                auto stream_of = [&](EmissionLine l) -> PhotonStream const & {
                    return l == EmissionLine::xx ? emission.xx : emission.x;
                };
                auto detector_of = [&](EmissionLine l) -> DetectorModel const & {
                    return l == EmissionLine::xx ? run.detectors.xx : run.detectors.x;
                };
                if (run.hbt_enabled) {
                    auto const r = run_hbt(stream_of(run.hbt_line), detector_of(run.hbt_line),
                                           run.seed, popt);
                    add_tags("hbt_1.ctag", "hbt", r.out1);
                    add_tags("hbt_2.ctag", "hbt", r.out2);
                }
                if (run.hom.enabled) {
                    auto const r = run_hom(stream_of(run.hom.line), run.hom.bench,
                                           detector_of(run.hom.line), run.seed, popt);
                    add_tags("hom_1.ctag", "hom", r.out1);
                    add_tags("hom_2.ctag", "hom", r.out2);
                }
            }
            if (run.michelson.enabled) {
                auto const scans = michelson_scan(run.michelson.shape, run.michelson.scan,
                                                  run.seed);
                auto const path = dir / "michelson.csv";
                write_csv(michelson_table(scans), path);
                files.push_back({{"name", "michelson.csv"},
                                 {"kind", "michelson"},
                                 {"records", run.michelson.scan.steps * scans.size()},
                                 {"sha256", sha256_file(path)}});
            }

            Json manifest;
            manifest["tool"] = "qdcascade";
            manifest["version"] = QDCASCADE_VERSION;
            manifest["command"] = "simulate";
            manifest["scenario"] = run.scenario;
            manifest["seed"] = run.seed;
            manifest["pulses"] = run.pulses;
            manifest["models"] = models_json(run);
            manifest["config"] = format_run_config(run);
            manifest["files"] = std::move(files);
            write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
            *ctx.out << (dir / "manifest.json").string() << '\n';
            return int{exit_ok};
        };
    });
}

} // namespace qdcascade::cli
