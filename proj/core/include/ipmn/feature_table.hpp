#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ipmn {

inline constexpr int kClassCount = 3;
/// healthy = 0, low-grade risk = 1, high-grade risk = 2
inline constexpr std::array<std::string_view, kClassCount> kClassNames{"healthy", "low", "high"};

/// Per-case numeric features with class labels, row-major.
struct FeatureTable {
  std::vector<std::string> case_ids;
  std::vector<std::string> centers;
  std::vector<int> labels;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t n_rows() const noexcept { return rows.size(); }
  std::size_t n_cols() const noexcept { return columns.size(); }

  /// Throws InvalidArgument when the column is absent.
  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::size_t c) const;
  std::size_t row_index(std::string_view case_id) const;

  FeatureTable select_rows(std::span<const std::size_t> indices) const;
  FeatureTable select_columns(std::span<const std::size_t> indices) const;
  /// Keeps columns whose name satisfies `keep`, preserving order.
  FeatureTable filter_columns(const std::function<bool(std::string_view)>& keep) const;

  /// Throws InvalidArgument on ragged rows, labels outside [0, kClassCount) or
  /// duplicate case ids.
  void validate() const;
};

/// Appends the columns of `right` matched by case id (same row order as `left`).
FeatureTable join_columns(const FeatureTable& left, const FeatureTable& right);

/// `case_id,center,label,<columns...>`
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_feature_table(const std::filesystem::path& path);

/// sign(x) * ln(1 + |x|): equals ln(1 + x) for x >= 0 and stays defined for negatives.
double signed_log1p(double x);

/// Per-column mean / standard deviation (population) of signed_log1p values.
struct FeatureScaler {
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> stddev;  // 0 marks a constant column
  std::vector<std::string> training_case_ids;

  bool is_constant(std::size_t c) const { return stddev[c] == 0.0; }
  bool operator==(const FeatureScaler&) const = default;
};

FeatureScaler fit_scaler(const FeatureTable& table);
/// z = (signed_log1p(x) - mean) / std; constant columns map to 0.
std::vector<double> apply_scaler(const FeatureScaler& scaler, std::span<const double> row);
/// Columns are matched by name; throws InvalidArgument when one is missing.
FeatureTable apply_scaler(const FeatureScaler& scaler, const FeatureTable& table);

std::string to_json(const FeatureScaler& scaler);
FeatureScaler scaler_from_json(std::string_view json);

}  // namespace ipmn
