#pragma once

// Flat "key = value  # comment" run configuration with typed units.
//
//   emitter.tau_xx = 161 ps
//   laser.rep_rate = 80 MHz
//   michelson.positions = 0, 10, 20 mm
//
// A bare number is taken in the unit requested by the caller.

#include "qdcascade/emitter.hpp"
#include "qdcascade/field_models.hpp"
#include "qdcascade/interferometer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qdcascade {

class Config {
  public:
    static Config parse(std::string_view text);
    static Config load(std::filesystem::path const &path);

    [[nodiscard]] bool has(std::string const &key) const;
    /// Raw value text; ConfigError naming the key if absent.
    [[nodiscard]] std::string const &raw(std::string const &key) const;

    /// Value converted to `unit` (ps, ns, Hz, MHz, V, nm, mm, eV, meV, ueV,
    /// V/nm, kV/cm, ... or "" for plain numbers).
    [[nodiscard]] double quantity(std::string const &key, std::string_view unit) const;
    [[nodiscard]] double quantity_or(std::string const &key, std::string_view unit,
                                     double fallback) const;
    [[nodiscard]] std::vector<double> quantity_list(std::string const &key,
                                                    std::string_view unit) const;
    [[nodiscard]] std::int64_t integer_or(std::string const &key,
                                          std::int64_t fallback) const;
    [[nodiscard]] std::string string_or(std::string const &key,
                                        std::string fallback) const;
    [[nodiscard]] bool boolean_or(std::string const &key, bool fallback) const;

    void set(std::string const &key, std::string value);
    [[nodiscard]] std::map<std::string, std::string> const &entries() const noexcept {
        return values_;
    }
    /// Keys never read through an accessor.
    [[nodiscard]] std::vector<std::string> unused_keys() const;

  private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

/// Converts "value [unit]" text to the requested unit. Throws
/// ConfigError(key) on unknown units or mismatched dimensions.
double convert_quantity(std::string_view text, std::string_view unit,
                        std::string const &key = {});

struct HomRunConfig {
    bool enabled = false;
    EmissionLine line = EmissionLine::x;
    HomBench bench;
};

struct MichelsonRunConfig {
    bool enabled = false;
    EmissionLine line = EmissionLine::x;
    LineShape shape;
    MichelsonScan scan;
};

struct RunConfig {
    std::string scenario = "cascade";
    std::uint64_t seed = 1;
    std::uint64_t pulses = 1000;
    unsigned threads = 1;
    std::filesystem::path output_dir = "out";

    EmitterModel emitter;
    LaserClock clock;
    CascadeDetectors detectors;
    /// Dark counts per signal detector, Hz (added to emitter background).
    double dark_rate = 100.0;
    ChannelMap channels;

    bool hbt_enabled = false;
    EmissionLine hbt_line = EmissionLine::xx;
    HomRunConfig hom;
    MichelsonRunConfig michelson;

    Picoseconds bin_width = 4;
    Picoseconds window = 75'000;

    DiodeGeometry diode;
    TrapFieldModel trap;
};

/// diode.* and trap.* blocks on their own, with defaults for absent keys.
DiodeGeometry make_diode(Config const &config);
TrapFieldModel make_trap(Config const &config);

/// Builds and validates a run configuration. emitter.tau_xx and
/// emitter.tau_x are required; validation errors name the offending key.
RunConfig make_run_config(Config const &config);

/// Round-trippable text of a run configuration.
std::string format_run_config(RunConfig const &run);

} // namespace qdcascade
