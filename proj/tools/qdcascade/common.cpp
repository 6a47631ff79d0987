#include "common.hpp"

#include "qdcascade/config.hpp"
#include "qdcascade/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace qdcascade::cli {

Format GlobalOptions::format_or(Format fallback) const {
    if (format == "csv")
        return Format::csv;
    if (format == "json")
        return Format::json;
    return fallback;
}

Json to_json(Measured m) {
    return Json{{"value", m.value}, {"error", m.error}};
}

Json to_json(Eigen::MatrixXd const &m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

DiodeGeometry diode_from(GlobalOptions const &global, std::optional<double> vb,
                         std::optional<double> thickness) {
    DiodeGeometry geom;
    if (!global.config.empty())
        geom = make_diode(Config::load(global.config));
    if (vb)
        geom.vb = *vb;
    if (thickness)
        geom.thickness = *thickness;
    geom.validate();
    return geom;
}

Json peaks_json(PeakAreas const &peaks) {
    return Json::parse(peak_areas_to_json(peaks));
}

void emit(std::string const &text, std::string const &path, std::ostream &out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::filesystem::path const p(path);
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    write_text_file(p, text);
}

std::filesystem::path sibling(std::string const &out, std::string const &suffix) {
    if (out.empty() || out == "-")
        return {};
    std::filesystem::path const p(out);
    return p.parent_path() / (p.stem().string() + suffix);
}

std::string sha256_file(std::filesystem::path const &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                 &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw IoError("sha256: digest initialization failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        auto const n = in.gcount();
        if (n > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(n)) != 1)
            throw IoError("sha256: digest update failed");
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw IoError("sha256: digest finalization failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i)
        os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

CsvTable parameter_table(Json const &parameters) {
    CsvTable t;
    std::vector<double> row;
    for (auto const &[name, m] : parameters.items()) {
        t.columns.push_back(name);
        t.columns.push_back(name + "_error");
        row.push_back(m.at("value").get<double>());
        row.push_back(m.at("error").get<double>());
    }
    t.rows.push_back(std::move(row));
    return t;
}

} // namespace qdcascade::cli
