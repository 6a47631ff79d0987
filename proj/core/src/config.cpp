#include "qdcascade/config.hpp"

#include "qdcascade/correlator.hpp"
#include "qdcascade/errors.hpp"
#include "qdcascade/report_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace qdcascade {

namespace {

enum class Dim { none, time, frequency, voltage, length, energy, field };

struct UnitInfo {
    std::string_view name;
    Dim dim;
    double factor;  // to SI (eV for energy)
};

constexpr UnitInfo unit_table[] = {
    {"", Dim::none, 1.0},
    {"ps", Dim::time, 1e-12},   {"ns", Dim::time, 1e-9},    {"us", Dim::time, 1e-6},
    {"ms", Dim::time, 1e-3},    {"s", Dim::time, 1.0},
    {"Hz", Dim::frequency, 1.0}, {"kHz", Dim::frequency, 1e3},
    {"MHz", Dim::frequency, 1e6}, {"GHz", Dim::frequency, 1e9},
    {"V", Dim::voltage, 1.0},   {"mV", Dim::voltage, 1e-3},
    {"nm", Dim::length, 1e-9},  {"um", Dim::length, 1e-6},  {"mm", Dim::length, 1e-3},
    {"m", Dim::length, 1.0},
    {"eV", Dim::energy, 1.0},   {"meV", Dim::energy, 1e-3}, {"ueV", Dim::energy, 1e-6},
    {"V/nm", Dim::field, 1e9},  {"kV/cm", Dim::field, 1e5}, {"V/m", Dim::field, 1.0},
};

UnitInfo const *find_unit(std::string_view name) {
    for (auto const &u : unit_table) {
        if (u.name == name)
            return &u;
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        auto const comma = s.find(',', start);
        parts.push_back(trim(s.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return parts;
}

EmissionLine parse_line(std::string const &key, std::string const &value) {
    if (value == "xx")
        return EmissionLine::xx;
    if (value == "x")
        return EmissionLine::x;
    throw ConfigError(key, "expected 'xx' or 'x', got '" + value + "'");
}

template <typename F>
void validated(std::string const &key, F &&check) {
    try {
        check();
    } catch (ContractError const &e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace

double convert_quantity(std::string_view text, std::string_view unit,
                        std::string const &key) {
    text = trim(text);
    double value = 0.0;
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{})
        throw ConfigError(key, "not a number: '" + std::string(text) + "'");
    auto const given_name = trim(std::string_view(ptr, text.data() + text.size() - ptr));
    auto const *target = find_unit(unit);
    if (!target)
        throw ConfigError(key, "unknown target unit '" + std::string(unit) + "'");
    if (given_name.empty())
        return value;
    auto const *given = find_unit(given_name);
    if (!given)
        throw ConfigError(key, "unknown unit '" + std::string(given_name) + "'");
    if (given->dim != target->dim)
        throw ConfigError(key, "unit '" + std::string(given_name) +
                                   "' is incompatible with '" + std::string(unit) + "'");
    if (given->factor == target->factor)
        return value;
    return value * (given->factor / target->factor);
}

Config Config::parse(std::string_view text) {
    Config cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto const eol = text.find('\n', pos);
        auto line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                  : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (auto const hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto const eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", "line " + std::to_string(line_no) +
                                      ": expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
        if (cfg.values_.contains(key))
            throw ConfigError(key, "duplicate key on line " + std::to_string(line_no));
        cfg.values_.emplace(std::move(key), std::move(value));
    }
    return cfg;
}

Config Config::load(std::filesystem::path const &path) {
    return parse(read_text_file(path));
}

bool Config::has(std::string const &key) const { return values_.contains(key); }

std::string const &Config::raw(std::string const &key) const {
    auto const it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(key, "missing required key");
    used_.insert(key);
    return it->second;
}

double Config::quantity(std::string const &key, std::string_view unit) const {
    return convert_quantity(raw(key), unit, key);
}

double Config::quantity_or(std::string const &key, std::string_view unit,
                           double fallback) const {
    return has(key) ? quantity(key, unit) : fallback;
}

std::vector<double> Config::quantity_list(std::string const &key,
                                          std::string_view unit) const {
    auto const &text = raw(key);
    auto parts = split_list(text);
    // A trailing unit applies to every element: "0, 10, 20 mm".
    std::string_view suffix;
    if (!parts.empty()) {
        auto const last = parts.back();
        auto const space = last.find_last_of(" \t");
        if (space != std::string_view::npos)
            suffix = trim(last.substr(space + 1));
    }
    std::vector<double> out;
    for (auto part : parts) {
        if (part.empty())
            continue;
        std::string item(part);
        bool const has_unit = std::isalpha(static_cast<unsigned char>(item.back())) != 0;
        if (!has_unit && !suffix.empty())
            item += " " + std::string(suffix);
        out.push_back(convert_quantity(item, unit, key));
    }
    return out;
}

std::int64_t Config::integer_or(std::string const &key, std::int64_t fallback) const {
    if (!has(key))
        return fallback;
    auto const text = trim(raw(key));
    std::int64_t value = 0;
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        // Accept integral values in scientific notation, e.g. 1e7.
        double d = 0.0;
        auto const [p2, e2] = std::from_chars(text.data(), text.data() + text.size(), d);
        if (e2 != std::errc{} || p2 != text.data() + text.size() || d != std::floor(d) ||
            std::abs(d) > 9.2e18)
            throw ConfigError(key, "not an integer: '" + std::string(text) + "'");
        value = static_cast<std::int64_t>(d);
    }
    return value;
}

std::string Config::string_or(std::string const &key, std::string fallback) const {
    return has(key) ? raw(key) : fallback;
}

bool Config::boolean_or(std::string const &key, bool fallback) const {
    if (!has(key))
        return fallback;
    auto const &v = raw(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError(key, "not a boolean: '" + v + "'");
}

void Config::set(std::string const &key, std::string value) {
    values_[key] = std::move(value);
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (auto const &[k, v] : values_) {
        if (!used_.contains(k))
            out.push_back(k);
    }
    return out;
}

DiodeGeometry make_diode(Config const &c) {
    DiodeGeometry diode;
    diode.vb = c.quantity_or("diode.vb", "V", diode.vb);
    diode.thickness = c.quantity_or("diode.thickness", "nm", diode.thickness);
    validated("diode", [&] { diode.validate(); });
    return diode;
}

TrapFieldModel make_trap(Config const &c) {
    TrapFieldModel trap;
    trap.delta0 = c.quantity_or("trap.delta0", "nm", trap.delta0);
    trap.d = c.quantity_or("trap.d", "nm", trap.d);
    trap.epsilon_r = c.quantity_or("trap.epsilon_r", "", trap.epsilon_r);
    trap.m_hh = c.quantity_or("trap.m_hh", "", trap.m_hh);
    trap.holes = static_cast<int>(c.integer_or("trap.holes", 0));
    auto const image = c.string_or("trap.image", "grounded_plane");
    if (image == "grounded_plane")
        trap.image = ImageCharge::grounded_plane;
    else if (image == "none")
        trap.image = ImageCharge::none;
    else
        throw ConfigError("trap.image", "expected 'grounded_plane' or 'none'");
    validated("trap", [&] { trap.validate(); });
    return trap;
}

RunConfig make_run_config(Config const &c) {
    RunConfig run;
    run.scenario = c.string_or("scenario", run.scenario);
    auto const seed = c.integer_or("seed", 1);
    if (seed < 0)
        throw ConfigError("seed", "must be non-negative");
    run.seed = static_cast<std::uint64_t>(seed);
    auto const pulses = c.integer_or("simulation.pulses", 1000);
    if (pulses < 1)
        throw ConfigError("simulation.pulses", "must be at least 1");
    run.pulses = static_cast<std::uint64_t>(pulses);
    auto const threads = c.integer_or("simulation.threads", 1);
    if (threads < 1)
        throw ConfigError("simulation.threads", "must be at least 1");
    run.threads = static_cast<unsigned>(threads);
    run.output_dir = c.string_or("output.dir", run.output_dir.string());

    auto &em = run.emitter;
    em.tau_xx = c.quantity("emitter.tau_xx", "ps");
    em.tau_x = c.quantity("emitter.tau_x", "ps");
    em.p_exc = c.quantity_or("emitter.p_exc", "", em.p_exc);
    if (c.has("emitter.g2_target")) {
        if (c.has("emitter.p_multi"))
            throw ConfigError("emitter.g2_target", "conflicts with emitter.p_multi");
        validated("emitter.g2_target", [&] {
            em.p_multi = p_multi_for_g2(c.quantity("emitter.g2_target", ""), em.p_exc);
        });
    } else {
        em.p_multi = c.quantity_or("emitter.p_multi", "", em.p_multi);
    }
    em.background_rate = c.quantity_or("emitter.background_rate", "Hz", em.background_rate);
    if (!(em.tau_xx > 0.0))
        throw ConfigError("emitter.tau_xx", "must be positive");
    if (!(em.tau_x > 0.0))
        throw ConfigError("emitter.tau_x", "must be positive");
    validated("emitter", [&] { em.validate(); });

    double const rep = c.quantity_or("laser.rep_rate", "Hz", 80e6);
    if (!(rep > 0.0))
        throw ConfigError("laser.rep_rate", "must be positive");
    validated("laser", [&] {
        run.clock = LaserClock::from_rep_rate(rep, c.quantity_or("laser.jitter", "ps", 0.0));
        run.clock.validate();
    });

    // Shared detector defaults, overridable per channel.
    DetectorModel base;
    base.jitter_fwhm = c.quantity_or("detector.jitter", "ps", 15.0);
    base.efficiency = c.quantity_or("detector.efficiency", "", 0.85);
    base.dead_time = c.quantity_or("detector.dead_time", "ps", 0.0);
    run.dark_rate = c.quantity_or("detector.dark_rate", "Hz", 100.0);
    auto detector_for = [&](std::string const &name, DetectorModel d) {
        auto const prefix = "detector." + name + ".";
        d.jitter_fwhm = c.quantity_or(prefix + "jitter", "ps", d.jitter_fwhm);
        d.efficiency = c.quantity_or(prefix + "efficiency", "", d.efficiency);
        d.dead_time = c.quantity_or(prefix + "dead_time", "ps", d.dead_time);
        validated("detector." + name, [&] { d.validate(); });
        return d;
    };
    run.detectors.xx = detector_for("xx", base);
    run.detectors.x = detector_for("x", base);
    DetectorModel sync_base;
    run.detectors.sync = detector_for("sync", sync_base);
    if (run.dark_rate < 0.0)
        throw ConfigError("detector.dark_rate", "must be non-negative");

    run.hbt_enabled = c.boolean_or("hbt.enabled", false);
    if (c.has("hbt.line"))
        run.hbt_line = parse_line("hbt.line", c.raw("hbt.line"));

    auto &hom = run.hom;
    hom.enabled = c.boolean_or("hom.enabled", false);
    if (c.has("hom.line"))
        hom.line = parse_line("hom.line", c.raw("hom.line"));
    hom.bench.delay = static_cast<Picoseconds>(
        std::llround(c.quantity_or("hom.delay", "ps", static_cast<double>(run.clock.period))));
    hom.bench.nu = c.quantity_or("hom.nu", "", 1.0);
    hom.bench.split_first = c.quantity_or("hom.split", "", 0.5);
    hom.bench.arm_transmissions.first = c.quantity_or("hom.t_short", "", 1.0);
    hom.bench.arm_transmissions.second = c.quantity_or("hom.t_long", "", 1.0);
    hom.bench.equalize_arms = c.boolean_or("hom.equalize_arms", true);
    auto const pol = c.string_or("hom.polarization", "co");
    if (pol == "co")
        hom.bench.polarization = Polarization::co;
    else if (pol == "cross")
        hom.bench.polarization = Polarization::cross;
    else
        throw ConfigError("hom.polarization", "expected 'co' or 'cross', got '" + pol + "'");
    validated("hom", [&] { hom.bench.validate(); });

    auto &mi = run.michelson;
    mi.enabled = c.boolean_or("michelson.enabled", false);
    if (c.has("michelson.line"))
        mi.line = parse_line("michelson.line", c.raw("michelson.line"));
    mi.shape.f_lorentz = c.quantity_or("michelson.f_lorentz", "ueV", 5.0);
    mi.shape.f_gauss = c.quantity_or("michelson.f_gauss", "ueV", 5.0);
    mi.shape.center = c.quantity_or("michelson.center", "eV", 1.59);
    if (c.has("michelson.positions"))
        mi.scan.coarse_positions_mm = c.quantity_list("michelson.positions", "mm");
    else
        for (int i = 0; i <= 12; ++i)
            mi.scan.coarse_positions_mm.push_back(5.0 * i);
    mi.scan.piezo_step_nm = c.quantity_or("michelson.step", "nm", mi.scan.piezo_step_nm);
    auto const steps = c.integer_or("michelson.steps", 100);
    if (steps < 3)
        throw ConfigError("michelson.steps", "must be at least 3");
    mi.scan.steps = static_cast<std::size_t>(steps);
    mi.scan.intensity = c.quantity_or("michelson.intensity", "", mi.scan.intensity);
    mi.scan.noise = c.quantity_or("michelson.noise", "", 0.01);
    if (mi.enabled) {
        validated("michelson", [&] {
            mi.shape.validate();
            if (!(mi.scan.piezo_step_nm > 0.0))
                throw ContractError("piezo step must be positive");
        });
    }

    run.bin_width = static_cast<Picoseconds>(
        std::llround(c.quantity_or("correlate.bin_width", "ps", 4.0)));
    run.window = static_cast<Picoseconds>(
        std::llround(c.quantity_or("correlate.window", "ps", 75'000.0)));
    validated("correlate", [&] {
        CorrelationRequest{run.bin_width, run.window, 0, 1}.validate();
    });

    run.diode = make_diode(c);
    run.trap = make_trap(c);
    return run;
}

std::string format_run_config(RunConfig const &run) {
    auto line_name = [](EmissionLine l) { return l == EmissionLine::xx ? "xx" : "x"; };
    std::ostringstream os;
    os.precision(17);
    os << "scenario = " << run.scenario << '\n'
       << "seed = " << run.seed << '\n'
       << "simulation.pulses = " << run.pulses << '\n'
       << "simulation.threads = " << run.threads << '\n'
       << "output.dir = " << run.output_dir.string() << '\n'
       << "emitter.tau_xx = " << run.emitter.tau_xx << " ps\n"
       << "emitter.tau_x = " << run.emitter.tau_x << " ps\n"
       << "emitter.p_exc = " << run.emitter.p_exc << '\n'
       << "emitter.p_multi = " << run.emitter.p_multi << '\n'
       << "emitter.background_rate = " << run.emitter.background_rate << " Hz\n"
       << "laser.rep_rate = " << run.clock.rep_rate << " Hz\n"
       << "laser.jitter = " << run.clock.pulse_jitter_fwhm << " ps\n"
       << "detector.dark_rate = " << run.dark_rate << " Hz\n";
    auto det = [&](char const *name, DetectorModel const &d) {
        os << "detector." << name << ".jitter = " << d.jitter_fwhm << " ps\n"
           << "detector." << name << ".efficiency = " << d.efficiency << '\n'
           << "detector." << name << ".dead_time = " << d.dead_time << " ps\n";
    };
    det("xx", run.detectors.xx);
    det("x", run.detectors.x);
    det("sync", run.detectors.sync);
    os << "hbt.enabled = " << (run.hbt_enabled ? "true" : "false") << '\n'
       << "hbt.line = " << line_name(run.hbt_line) << '\n'
       << "hom.enabled = " << (run.hom.enabled ? "true" : "false") << '\n'
       << "hom.line = " << line_name(run.hom.line) << '\n'
       << "hom.delay = " << run.hom.bench.delay << " ps\n"
       << "hom.nu = " << run.hom.bench.nu << '\n'
       << "hom.split = " << run.hom.bench.split_first << '\n'
       << "hom.t_short = " << run.hom.bench.arm_transmissions.first << '\n'
       << "hom.t_long = " << run.hom.bench.arm_transmissions.second << '\n'
       << "hom.equalize_arms = " << (run.hom.bench.equalize_arms ? "true" : "false") << '\n'
       << "hom.polarization = "
       << (run.hom.bench.polarization == Polarization::co ? "co" : "cross") << '\n'
       << "michelson.enabled = " << (run.michelson.enabled ? "true" : "false") << '\n'
       << "michelson.line = " << line_name(run.michelson.line) << '\n'
       << "michelson.f_lorentz = " << run.michelson.shape.f_lorentz << " ueV\n"
       << "michelson.f_gauss = " << run.michelson.shape.f_gauss << " ueV\n"
       << "michelson.center = " << run.michelson.shape.center << " eV\n"
       << "michelson.positions = ";
    for (std::size_t i = 0; i < run.michelson.scan.coarse_positions_mm.size(); ++i)
        os << (i ? ", " : "") << run.michelson.scan.coarse_positions_mm[i];
    os << " mm\n"
       << "michelson.step = " << run.michelson.scan.piezo_step_nm << " nm\n"
       << "michelson.steps = " << run.michelson.scan.steps << '\n'
       << "michelson.intensity = " << run.michelson.scan.intensity << '\n'
       << "michelson.noise = " << run.michelson.scan.noise << '\n'
       << "correlate.bin_width = " << run.bin_width << " ps\n"
       << "correlate.window = " << run.window << " ps\n"
       << "diode.vb = " << run.diode.vb << " V\n"
       << "diode.thickness = " << run.diode.thickness << " nm\n"
       << "trap.delta0 = " << run.trap.delta0 << " nm\n"
       << "trap.d = " << run.trap.d << " nm\n"
       << "trap.epsilon_r = " << run.trap.epsilon_r << '\n'
       << "trap.m_hh = " << run.trap.m_hh << '\n'
       << "trap.holes = " << run.trap.holes << '\n'
       << "trap.image = "
       << (run.trap.image == ImageCharge::none ? "none" : "grounded_plane") << '\n';
    return os.str();
}

} // namespace qdcascade
