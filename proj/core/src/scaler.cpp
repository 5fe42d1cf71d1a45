#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "ipmn/error.hpp"
#include "ipmn/feature_table.hpp"

namespace ipmn {

double signed_log1p(double x) { return x >= 0.0 ? std::log1p(x) : -std::log1p(-x); }

FeatureScaler fit_scaler(const FeatureTable& table) {
  table.validate();
  if (table.n_rows() == 0) throw InvalidArgument("cannot fit a scaler on an empty table");
  FeatureScaler s;
  s.columns = table.columns;
  s.training_case_ids = table.case_ids;
  s.mean.assign(table.n_cols(), 0.0);
  s.stddev.assign(table.n_cols(), 0.0);
  const double n = static_cast<double>(table.n_rows());
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    std::vector<double> t = table.column(c);
    for (double& v : t) {
      if (!std::isfinite(v)) throw NumericError("non-finite value in column " + table.columns[c]);
      v = signed_log1p(v);
    }
    double sum = 0.0;
    for (double v : t) sum += v;
    const double mean = sum / n;
    s.mean[c] = mean;
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    if (*lo == *hi) continue;  // constant column
    double ss = 0.0;
    for (double v : t) ss += (v - mean) * (v - mean);
    s.stddev[c] = std::sqrt(ss / n);
  }
  return s;
}

std::vector<double> apply_scaler(const FeatureScaler& scaler, std::span<const double> row) {
  if (row.size() != scaler.columns.size()) throw InvalidArgument("scaler arity mismatch");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (!std::isfinite(row[c])) throw NumericError("non-finite value in column " + scaler.columns[c]);
    out[c] = scaler.is_constant(c) ? 0.0 : (signed_log1p(row[c]) - scaler.mean[c]) / scaler.stddev[c];
  }
  return out;
}

FeatureTable apply_scaler(const FeatureScaler& scaler, const FeatureTable& table) {
  std::vector<std::size_t> idx;
  idx.reserve(scaler.columns.size());
  for (const auto& name : scaler.columns) idx.push_back(table.column_index(name));
  FeatureTable out = table.select_columns(idx);
  for (auto& row : out.rows) row = apply_scaler(scaler, row);
  return out;
}

std::string to_json(const FeatureScaler& scaler) {
  nlohmann::ordered_json j;
  j["transform"] = "signed_log1p";
  j["columns"] = scaler.columns;
  j["mean"] = scaler.mean;
  j["stddev"] = scaler.stddev;
  j["training_case_ids"] = scaler.training_case_ids;
  return j.dump(2);
}

FeatureScaler scaler_from_json(std::string_view text) {
  FeatureScaler s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.columns = j.at("columns").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    s.training_case_ids = j.value("training_case_ids", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid scaler JSON: ") + e.what());
  }
  if (s.mean.size() != s.columns.size() || s.stddev.size() != s.columns.size()) {
    throw FormatError("scaler JSON arrays have inconsistent lengths");
  }
  return s;
}

}  // namespace ipmn
