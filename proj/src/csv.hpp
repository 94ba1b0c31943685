#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pcalign::csv {

/// Shortest round-trip form ("%.17g"); "nan", "inf" and "-inf" for non-finite values.
std::string fmt(double v);
double parse_double(const std::string& text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws FormatError when absent.
  std::size_t column(const std::string& name) const;
  bool has(const std::string& name) const;
};

/// Comma-separated, no quoting (fields never contain commas), '\n' line ends.
void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

std::string join(const std::vector<double>& values, char sep = ';');
std::vector<double> split_doubles(const std::string& text, char sep = ';');

}  // namespace pcalign::csv
