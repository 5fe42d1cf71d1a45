#include "ipmn/feature_table.hpp"

#include <set>
#include <unordered_map>

#include "ipmn/csv.hpp"
#include "ipmn/error.hpp"

namespace ipmn {

std::size_t FeatureTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw InvalidArgument("feature table has no column '" + std::string(name) + "'");
}

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::size_t FeatureTable::row_index(std::string_view case_id) const {
  for (std::size_t i = 0; i < case_ids.size(); ++i) {
    if (case_ids[i] == case_id) return i;
  }
  throw DataError("case id not found in feature table: " + std::string(case_id));
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> indices) const {
  FeatureTable out;
  out.columns = columns;
  for (std::size_t i : indices) {
    out.case_ids.push_back(case_ids.at(i));
    out.centers.push_back(centers.at(i));
    out.labels.push_back(labels.at(i));
    out.rows.push_back(rows.at(i));
  }
  return out;
}

FeatureTable FeatureTable::select_columns(std::span<const std::size_t> indices) const {
  FeatureTable out;
  out.case_ids = case_ids;
  out.centers = centers;
  out.labels = labels;
  for (std::size_t c : indices) out.columns.push_back(columns.at(c));
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> row;
    row.reserve(indices.size());
    for (std::size_t c : indices) row.push_back(r[c]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

FeatureTable FeatureTable::filter_columns(const std::function<bool(std::string_view)>& keep) const {
  std::vector<std::size_t> idx;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (keep(columns[c])) idx.push_back(c);
  }
  return select_columns(idx);
}

void FeatureTable::validate() const {
  const std::size_t n = rows.size();
  if (case_ids.size() != n || centers.size() != n || labels.size() != n) {
    throw InvalidArgument("feature table metadata length mismatch");
  }
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != columns.size()) throw InvalidArgument("ragged feature table row " + case_ids[i]);
    if (labels[i] < 0 || labels[i] >= kClassCount) throw InvalidArgument("label out of range for " + case_ids[i]);
    if (!seen.insert(case_ids[i]).second) throw DataError("duplicate case id " + case_ids[i]);
  }
}

FeatureTable join_columns(const FeatureTable& left, const FeatureTable& right) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < right.case_ids.size(); ++i) index.emplace(right.case_ids[i], i);
  FeatureTable out = left;
  out.columns.insert(out.columns.end(), right.columns.begin(), right.columns.end());
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto it = index.find(left.case_ids[i]);
    if (it == index.end()) throw DataError("case id missing from joined table: " + left.case_ids[i]);
    const auto& extra = right.rows[it->second];
    out.rows[i].insert(out.rows[i].end(), extra.begin(), extra.end());
  }
  return out;
}

void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  table.validate();
  csv::Table t;
  t.header = {"case_id", "center", "label"};
  t.header.insert(t.header.end(), table.columns.begin(), table.columns.end());
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    std::vector<std::string> row{table.case_ids[i], table.centers[i], std::to_string(table.labels[i])};
    for (double v : table.rows[i]) row.push_back(csv::format_double(v));
    t.rows.push_back(std::move(row));
  }
  csv::write(t, path);
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  if (t.header.size() < 3 || t.header[0] != "case_id" || t.header[1] != "center" || t.header[2] != "label") {
    throw FormatError("feature table must start with case_id,center,label: " + path.string());
  }
  FeatureTable out;
  out.columns.assign(t.header.begin() + 3, t.header.end());
  for (const auto& r : t.rows) {
    out.case_ids.push_back(r[0]);
    out.centers.push_back(r[1]);
    out.labels.push_back(csv::parse_int(r[2], "label of " + r[0]));
    std::vector<double> row;
    row.reserve(out.columns.size());
    for (std::size_t c = 3; c < r.size(); ++c) row.push_back(csv::parse_double(r[c], t.header[c] + " of " + r[0]));
    out.rows.push_back(std::move(row));
  }
  out.validate();
  return out;
}

}  // namespace ipmn
