#include "relent/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "relent/errors.hpp"

namespace relent {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string csv_text(const std::vector<Column>& columns) {
    std::string out;
    const std::size_t rows = columns.empty() ? 0 : columns.front().values.size();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].values.size() != rows)
            throw DimensionError("column '" + columns[c].name + "' has " + std::to_string(columns[c].values.size()) +
                                 " rows, expected " + std::to_string(rows));
        out += (c ? "," : "") + columns[c].name;
    }
    out += '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_number(columns[c].values[r]);
        out += '\n';
    }
    return out;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

void write_csv(const std::string& path, const std::vector<Column>& columns) { write_text(path, csv_text(columns)); }

std::string metadata_text(const Metadata& entries) {
    std::string out;
    for (const auto& [k, v] : entries) out += k + ": " + v + '\n';
    return out;
}

void write_metadata(const std::string& path, const Metadata& entries) { write_text(path, metadata_text(entries)); }

std::string metadata_path(const std::string& csv_path) { return csv_path + ".meta"; }

}  // namespace relent
