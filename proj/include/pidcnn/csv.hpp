#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pidcnn {

/// Plain comma-separated table: no quoting, fields never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::invalid_argument if absent.
  std::size_t column(const std::string& name) const;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
/// Inverse of format_number; throws std::invalid_argument on junk.
double parse_number(const std::string& s);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
/// Throws IoError if the file cannot be read or a row has the wrong width.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace pidcnn
