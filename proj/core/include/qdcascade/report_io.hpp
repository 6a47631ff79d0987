#pragma once

// Text serializations shared by the library and the CLI: histogram CSV,
// generic numeric CSV tables with "# key=value" metadata comments, and
// JSON peak-area reports.

#include "qdcascade/timetag.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qdcascade {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> meta;

    /// Index of a named column; throws FormatError if absent.
    [[nodiscard]] std::size_t column(std::string const &name) const;
    [[nodiscard]] std::vector<double> column_values(std::string const &name) const;
    [[nodiscard]] bool has_column(std::string const &name) const;
};

CsvTable parse_csv(std::string const &text);
CsvTable read_csv(std::filesystem::path const &path);
std::string format_csv(CsvTable const &table);
void write_csv(CsvTable const &table, std::filesystem::path const &path);

/// Columns delay_ps,counts with bin_width_ps and total_pairs metadata.
CsvTable histogram_to_table(CoincidenceHistogram const &hist);
CoincidenceHistogram histogram_from_table(CsvTable const &table);

void write_histogram_csv(CoincidenceHistogram const &hist,
                         std::filesystem::path const &path);
CoincidenceHistogram read_histogram_csv(std::filesystem::path const &path);

std::string peak_areas_to_json(PeakAreas const &peaks);

void write_text_file(std::filesystem::path const &path,
                     std::string const &text);
std::string read_text_file(std::filesystem::path const &path);

} // namespace qdcascade
