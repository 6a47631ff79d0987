#include "commands.hpp"

#include "qdcascade/correlator.hpp"
#include "qdcascade/tag_file.hpp"

#include <CLI11.hpp>

#include <memory>
#include <ostream>

namespace qdcascade::cli {

namespace {

struct CorrelateArgs {
    std::string a;
    std::string b;
    std::string merged;
    std::uint16_t channel_a = 0;
    std::uint16_t channel_b = 1;
    Picoseconds bin_width = 4;
    Picoseconds window = 75'000;
    Picoseconds period = 12'500;
    Picoseconds half_width = 0;
    std::string peaks;
};

} // namespace

void add_correlate(CLI::App &app, Context &ctx) {
    auto args = std::make_shared<CorrelateArgs>();
    auto *cmd = app.add_subcommand("correlate", "Coincidence histogram of two tag streams");
    cmd->add_option("--a", args->a, "Start-channel tag file")->check(CLI::ExistingFile);
    cmd->add_option("--b", args->b, "Stop-channel tag file")->check(CLI::ExistingFile);
    cmd->add_option("--merged", args->merged, "Single tag file holding both channels")
        ->check(CLI::ExistingFile)
        ->excludes("--a")
        ->excludes("--b");
    cmd->add_option("--channel-a", args->channel_a, "Start channel in --merged")
        ->capture_default_str();
    cmd->add_option("--channel-b", args->channel_b, "Stop channel in --merged")
        ->capture_default_str();
    cmd->add_option("--bin-width", args->bin_width, "Bin width, ps")->capture_default_str();
    cmd->add_option("--window", args->window, "Half range of delays, ps")->capture_default_str();
    cmd->add_option("--period", args->period, "Laser period for peak areas, ps")
        ->capture_default_str();
    cmd->add_option("--half-width", args->half_width, "Peak half-width, ps (0: period/4)");
    cmd->add_option("--peaks", args->peaks, "Write the peak-area JSON report here");
    cmd->callback([&ctx, args] {
        ctx.action = [&ctx, args] {
            auto const &a = *args;
            CorrelationRequest req{a.bin_width, a.window, a.channel_a, a.channel_b};
            CorrelateOptions const opt{.threads = ctx.global.threads};
            CoincidenceHistogram hist;
            if (!a.merged.empty()) {
                auto const tags = read_tags(a.merged);
                hist = correlate_channels(tags, req, opt);
            } else {
                if (a.a.empty() || a.b.empty())
                    throw UsageError("correlate: give --a and --b, or --merged");
                auto const ta = read_tags(a.a);
                auto const tb = read_tags(a.b);
                hist = correlate(ta, tb, req, opt);
            }
            auto const fmt = ctx.global.format_or(Format::csv);
            std::string peaks_text;
            if (fmt == Format::json || !a.peaks.empty()) {
                auto const hw = a.half_width > 0 ? a.half_width : a.period / 4;
                peaks_text = peaks_json(integrate_peaks(hist, a.period, hw)).dump(2) + "\n";
            }
            if (fmt == Format::json)
                emit(peaks_text, ctx.global.out, *ctx.out);
            else
                emit(format_csv(histogram_to_table(hist)), ctx.global.out, *ctx.out);
            if (!a.peaks.empty())
                emit(peaks_text, a.peaks, *ctx.out);
            return int{exit_ok};
        };
    });
}

} // namespace qdcascade::cli
