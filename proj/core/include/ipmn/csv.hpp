#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ipmn::csv {

/// Minimal comma-separated table: first row is the header. Fields are not
/// quoted; embedded commas are rejected on write.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws FormatError when absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string_view source = "<memory>");
void write(const Table& table, const std::filesystem::path& path);
std::string to_string(const Table& table);

/// Shortest round-trip decimal representation ('.' separator).
std::string format_double(double v);
/// Throws FormatError naming `context` when the field is not a number.
double parse_double(std::string_view field, std::string_view context);
int parse_int(std::string_view field, std::string_view context);

}  // namespace ipmn::csv
