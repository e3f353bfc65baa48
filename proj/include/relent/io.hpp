#pragma once

// Flat-file output: CSV tables (9 significant digits, header row, '\n' endings) and
// "key: value" metadata sidecars.

#include <string>
#include <utility>
#include <vector>

namespace relent {

// %.9g; -0 prints as 0, non-finite values as nan / inf / -inf.
std::string format_number(double value);

struct Column {
    std::string name;
    std::vector<double> values;
};

std::string csv_text(const std::vector<Column>& columns);
// Throws IoError when the file cannot be written, DimensionError on ragged columns.
void write_csv(const std::string& path, const std::vector<Column>& columns);

using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string metadata_text(const Metadata& entries);
void write_metadata(const std::string& path, const Metadata& entries);
std::string metadata_path(const std::string& csv_path);

}  // namespace relent
