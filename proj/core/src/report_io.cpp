#include "qdcascade/report_io.hpp"

#include "qdcascade/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace qdcascade {

namespace {

std::string trim(std::string_view s) {
    auto const b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto const e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string const &line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(std::string const &s, std::size_t line_no) {
    char *end = nullptr;
    double const v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError("csv line " + std::to_string(line_no) +
                          ": not a number: '" + s + "'");
    }
    return v;
}

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
        std::ostringstream os;
        os << static_cast<long long>(v);
        return os.str();
    }
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

} // namespace

std::size_t CsvTable::column(std::string const &name) const {
    auto const it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        throw FormatError("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

bool CsvTable::has_column(std::string const &name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> CsvTable::column_values(std::string const &name) const {
    auto const c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto const &row : rows)
        out.push_back(row[c]);
    return out;
}

CsvTable parse_csv(std::string const &text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto const t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '#') {
            auto const body = trim(std::string_view(t).substr(1));
            auto const eq = body.find('=');
            if (eq != std::string::npos)
                table.meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
            continue;
        }
        auto cells = split(t, ',');
        if (table.columns.empty()) {
            table.columns = std::move(cells);
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw FormatError("csv line " + std::to_string(line_no) + ": " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(table.columns.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto const &c : cells)
            row.push_back(parse_double(c, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty())
        throw FormatError("csv: no header line");
    return table;
}

std::string read_text_file(std::filesystem::path const &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(std::filesystem::path const &path,
                     std::string const &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw IoError("write failed for " + path.string());
}

CsvTable read_csv(std::filesystem::path const &path) {
    return parse_csv(read_text_file(path));
}

std::string format_csv(CsvTable const &table) {
    std::ostringstream os;
    for (auto const &[k, v] : table.meta)
        os << "# " << k << "=" << v << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << (i ? "," : "") << table.columns[i];
    os << "\n";
    for (auto const &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_number(row[i]);
        os << "\n";
    }
    return os.str();
}

void write_csv(CsvTable const &table, std::filesystem::path const &path) {
    write_text_file(path, format_csv(table));
}

CsvTable histogram_to_table(CoincidenceHistogram const &hist) {
    CsvTable t;
    t.columns = {"delay_ps", "counts"};
    t.meta["bin_width_ps"] = std::to_string(hist.bin_width);
    t.meta["total_pairs"] = std::to_string(hist.total_pairs);
    t.rows.reserve(hist.size());
    for (std::size_t i = 0; i < hist.size(); ++i) {
        t.rows.push_back({static_cast<double>(hist.bin_center(i)),
                          static_cast<double>(hist.counts[i])});
    }
    return t;
}

CoincidenceHistogram histogram_from_table(CsvTable const &table) {
    auto const delays = table.column_values("delay_ps");
    auto const counts = table.column_values("counts");
    CoincidenceHistogram hist;
    if (auto it = table.meta.find("bin_width_ps"); it != table.meta.end())
        hist.bin_width = std::stoll(it->second);
    else if (delays.size() >= 2)
        hist.bin_width = std::llround(delays[1] - delays[0]);
    if (hist.bin_width <= 0)
        throw FormatError("histogram csv: non-positive bin width");
    hist.center_offset = delays.empty() ? 0 : std::llround(delays.front());
    hist.counts.reserve(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (std::llround(delays[i]) != hist.bin_center(i))
            throw FormatError("histogram csv: delays not uniformly spaced");
        if (counts[i] < 0)
            throw FormatError("histogram csv: negative count");
        hist.counts.push_back(static_cast<std::uint64_t>(std::llround(counts[i])));
    }
    hist.recount();
    return hist;
}

void write_histogram_csv(CoincidenceHistogram const &hist,
                         std::filesystem::path const &path) {
    write_csv(histogram_to_table(hist), path);
}

CoincidenceHistogram read_histogram_csv(std::filesystem::path const &path) {
    return histogram_from_table(read_csv(path));
}

std::string peak_areas_to_json(PeakAreas const &peaks) {
    nlohmann::json j;
    j["period_ps"] = peaks.period;
    j["half_width_ps"] = peaks.half_width;
    auto &arr = j["peaks"] = nlohmann::json::array();
    for (auto const &[k, a] : peaks.areas) {
        arr.push_back({{"index", k},
                       {"delay_ps", static_cast<long long>(k) * peaks.period},
                       {"area", a.area},
                       {"error", a.error}});
    }
    return j.dump(2);
}

} // namespace qdcascade
