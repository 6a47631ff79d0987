#pragma once

#include "qdcascade/field_models.hpp"
#include "qdcascade/measured.hpp"
#include "qdcascade/report_io.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace qdcascade::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { exit_ok = 0, exit_analysis = 1, exit_usage = 2 };

/// Bad invocation that the argument parser cannot see (kind mismatch,
/// contradictory flags). Exit code 2.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

/// Flags shared by every subcommand.
struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads = 1;
    std::string format;

    [[nodiscard]] Format format_or(Format fallback) const;
};

Json to_json(Measured m);
Json to_json(Eigen::MatrixXd const &m);

/// Diode block of --config (if any) with command-line overrides.
DiodeGeometry diode_from(GlobalOptions const &global, std::optional<double> vb,
                         std::optional<double> thickness);

Json peaks_json(PeakAreas const &peaks);

/// Writes `text` to `path`, or to `out` when the path is empty.
void emit(std::string const &text, std::string const &path, std::ostream &out);

/// Sibling file of `out` named <stem><suffix>; empty when out is empty.
std::filesystem::path sibling(std::string const &out, std::string const &suffix);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(std::filesystem::path const &path);

/// One-row table <name>,<name>_error,... from {"name": {value, error}}.
CsvTable parameter_table(Json const &parameters);

} // namespace qdcascade::cli
