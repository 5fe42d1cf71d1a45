#include "ipmn/cross_validation.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <utility>

#include "ipmn/error.hpp"
#include "ipmn/parallel.hpp"
#include "ipmn/random.hpp"

namespace ipmn {

std::vector<std::size_t> CvSplit::train_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> CvSplit::test_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

CvSplit stratified_kfold(std::span<const int> labels, std::span<const std::string> centers, int k,
                         std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  if (labels.size() != centers.size()) throw InvalidArgument("labels and centers differ in length");
  if (labels.size() < static_cast<std::size_t>(k)) throw InvalidArgument("fewer cases than folds");
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < labels.size(); ++i) strata[{labels[i], centers[i]}].push_back(i);

  Rng rng(seed);
  CvSplit split;
  split.k = k;
  split.fold.assign(labels.size(), -1);
  std::size_t deal = 0;
  for (auto& [key, members] : strata) {
    rng.shuffle(members);
    for (std::size_t i : members) split.fold[i] = static_cast<int>(deal++ % static_cast<std::size_t>(k));
  }
  return split;
}

std::vector<GbtParams> default_param_grid(const GbtParams& base) {
  std::vector<GbtParams> grid;
  for (int n : {60, 100, 140, 180}) {
    for (int d : {2, 3, 4, 5}) {
      GbtParams p = base;
      p.n_estimators = n;
      p.max_depth = d;
      grid.push_back(p);
    }
  }
  return grid;
}

namespace {

int argmax(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<double> fold_accuracies(const FeatureTable& table, const CvSplit& split, const GbtParams& params,
                                    int jobs) {
  std::vector<double> acc(split.k, 0.0);
  parallel_for(static_cast<std::size_t>(split.k), jobs, [&](std::size_t f) {
    const auto train = split.train_indices(static_cast<int>(f));
    const auto test = split.test_indices(static_cast<int>(f));
    const GbtModel model = gbt_fit(table.select_rows(train), params);
    int correct = 0;
    for (std::size_t i : test) {
      if (argmax(gbt_predict_proba(model, table.rows[i])) == table.labels[i]) ++correct;
    }
    acc[f] = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  });
  return acc;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double cv_accuracy(const FeatureTable& table, const CvSplit& split, const GbtParams& params, int jobs) {
  return mean(fold_accuracies(table, split, params, jobs));
}

GridSearchResult grid_search(const FeatureTable& table, std::span<const GbtParams> grid, int k, std::uint64_t seed,
                             int jobs) {
  if (grid.empty()) throw InvalidArgument("parameter grid is empty");
  table.validate();
  const CvSplit split = stratified_kfold(table.labels, table.centers, k, seed);
  GridSearchResult result;
  result.table.resize(grid.size());
  // Parallel over grid points; each fit itself is sequential.
  parallel_for(grid.size(), jobs, [&](std::size_t g) {
    GridPoint& point = result.table[g];
    point.params = grid[g];
    point.fold_accuracy = fold_accuracies(table, split, grid[g], 1);
    point.mean_accuracy = mean(point.fold_accuracy);
  });
  for (std::size_t g = 1; g < result.table.size(); ++g) {
    if (result.table[g].mean_accuracy > result.table[result.best].mean_accuracy) result.best = g;
  }
  return result;
}

std::vector<std::vector<double>> out_of_fold_proba(const FeatureTable& table, const CvSplit& split,
                                                   const GbtParams& params, int jobs) {
  if (split.fold.size() != table.n_rows()) throw InvalidArgument("split does not match the table");
  std::vector<std::vector<double>> out(table.n_rows());
  parallel_for(static_cast<std::size_t>(split.k), jobs, [&](std::size_t f) {
    const auto train = split.train_indices(static_cast<int>(f));
    const GbtModel model = gbt_fit(table.select_rows(train), params);
    for (std::size_t i : split.test_indices(static_cast<int>(f))) out[i] = gbt_predict_proba(model, table.rows[i]);
  });
  return out;
}

std::string to_json(const GridSearchResult& result) {
  nlohmann::ordered_json j;
  j["best"] = result.best;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& p : result.table) {
    nlohmann::ordered_json r;
    r["n_estimators"] = p.params.n_estimators;
    r["max_depth"] = p.params.max_depth;
    r["learning_rate"] = p.params.learning_rate;
    r["fold_accuracy"] = p.fold_accuracy;
    r["mean_accuracy"] = p.mean_accuracy;
    rows.push_back(r);
  }
  j["table"] = rows;
  return j.dump(1);
}

}  // namespace ipmn
