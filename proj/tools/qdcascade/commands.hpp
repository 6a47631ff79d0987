#pragma once

#include "common.hpp"

#include <functional>
#include <iosfwd>

namespace CLI {
class App;
}

namespace qdcascade::cli {

struct Context {
    GlobalOptions global;
    std::ostream *out = nullptr;
    std::ostream *err = nullptr;
    /// Set by the selected subcommand; returns the exit code.
    std::function<int()> action;
};

void add_simulate(CLI::App &app, Context &ctx);
void add_correlate(CLI::App &app, Context &ctx);
void add_fit_lifetime(CLI::App &app, Context &ctx);
void add_fit_stark(CLI::App &app, Context &ctx);
void add_fit_michelson(CLI::App &app, Context &ctx);
void add_analyze_hom(CLI::App &app, Context &ctx);
void add_analyze_g2(CLI::App &app, Context &ctx);
void add_field_model(CLI::App &app, Context &ctx);
void add_reproduce(CLI::App &app, Context &ctx);
void add_plotdata(CLI::App &app, Context &ctx);

} // namespace qdcascade::cli
