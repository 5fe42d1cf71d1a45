#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipmn/feature_table.hpp"

namespace ipmn {

struct GbtParams {
  int n_estimators = 140;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_leaf = 1;      // minimum training rows per child
  double lambda = 1.0;   // L2 penalty on leaf weights
  std::uint64_t seed = 0;

  bool operator==(const GbtParams&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf = 0.0;  // already scaled by the learning rate

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary regression tree; node 0 is the root. Rows with x[feature] < threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

/// Softmax boosted-tree ensemble. trees[r * n_classes + c] is the tree of
/// class c in round r.
struct GbtModel {
  int n_classes = kClassCount;
  double learning_rate = 0.1;
  std::vector<double> base_scores;  // log class priors
  std::vector<RegressionTree> trees;
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  GbtParams params;
  std::vector<std::string> training_case_ids;  // sorted
  std::vector<double> training_loss;           // mean log-loss, [0] before the first round

  bool operator==(const GbtModel&) const = default;
};

/// Exact greedy softmax boosting with Newton leaf weights -G/(H + lambda).
/// Rows are put in a canonical order first, so the model does not depend on
/// the input row order. Throws InvalidArgument for fewer than two classes,
/// non-finite features or ragged rows.
GbtModel gbt_fit(std::span<const std::vector<double>> rows, std::span<const int> labels, const GbtParams& params);
GbtModel gbt_fit(const FeatureTable& table, const GbtParams& params);

std::vector<double> gbt_raw_scores(const GbtModel& model, std::span<const double> x);
/// Softmax of the summed scores.
std::vector<double> gbt_predict_proba(const GbtModel& model, std::span<const double> x);
std::vector<std::vector<double>> gbt_predict_proba(const GbtModel& model, const FeatureTable& table);

/// Mean of -log p[label].
double multiclass_log_loss(std::span<const std::vector<double>> probabilities, std::span<const int> labels);

/// Byte-stable JSON: {classes, learning_rate, base_scores, trees, meta}.
std::string to_json(const GbtModel& model);
GbtModel gbt_from_json(std::string_view json);

}  // namespace ipmn
