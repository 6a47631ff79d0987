#include "cli.hpp"

#include "commands.hpp"
#include "common.hpp"

#include "qdcascade/errors.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace qdcascade::cli {

int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err) {
    Context ctx;
    ctx.out = &out;
    ctx.err = &err;

    CLI::App app{"Quantum-dot cascade simulation and analysis", "qdcascade"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", QDCASCADE_VERSION);
    app.add_option("--config", ctx.global.config, "Run configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", ctx.global.seed, "Random seed (overrides the config)");
    app.add_option("--out", ctx.global.out, "Output file, or directory for simulate");
    app.add_option("--threads", ctx.global.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", ctx.global.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));

    add_simulate(app, ctx);
    add_correlate(app, ctx);
    add_fit_lifetime(app, ctx);
    add_fit_stark(app, ctx);
    add_fit_michelson(app, ctx);
    add_analyze_hom(app, ctx);
    add_analyze_g2(app, ctx);
    add_field_model(app, ctx);
    add_reproduce(app, ctx);
    add_plotdata(app, ctx);

    std::vector<char const *> argv;
    argv.reserve(args.size());
    for (auto const &a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (CLI::Success const &e) {
        return app.exit(e, out, err);
    } catch (CLI::ParseError const &e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        return ctx.action ? ctx.action() : exit_usage;
    } catch (UsageError const &e) {
        err << "qdcascade: " << e.what() << '\n';
        return exit_usage;
    } catch (ConfigError const &e) {
        err << "qdcascade: config error: " << e.what() << '\n';
        return exit_usage;
    } catch (std::exception const &e) {
        err << "qdcascade: " << e.what() << '\n';
        return exit_analysis;
    }
}

} // namespace qdcascade::cli
