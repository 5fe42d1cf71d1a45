#include "ipmn/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ipmn/error.hpp"

namespace ipmn::csv {
namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw FormatError("CSV is missing column '" + std::string(name) + "'");
}

Table parse(std::string_view text, std::string_view source) {
  Table t;
  std::size_t pos = 0;
  bool first = true;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw FormatError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (first) throw FormatError(std::string(source) + ": empty CSV");
  return t;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CSV: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string to_string(const Table& table) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].find_first_of(",\n") != std::string::npos) {
        throw InvalidArgument("CSV field contains a separator: " + row[i]);
      }
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return out;
}

void write(const Table& table, const std::filesystem::path& path) {
  const std::string text = to_string(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write CSV: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::string_view context) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end) {
    throw FormatError("not a number in " + std::string(context) + ": '" + std::string(field) + "'");
  }
  return v;
}

int parse_int(std::string_view field, std::string_view context) {
  int v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw FormatError("not an integer in " + std::string(context) + ": '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace ipmn::csv
