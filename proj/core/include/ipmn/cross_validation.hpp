#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ipmn/feature_table.hpp"
#include "ipmn/gbt.hpp"

namespace ipmn {

/// fold[i] is the fold of case i; strata are (label, center) pairs.
struct CvSplit {
  int k = 0;
  std::vector<int> fold;

  std::vector<std::size_t> train_indices(int f) const;
  std::vector<std::size_t> test_indices(int f) const;
};

/// Cases of each stratum are shuffled with a seeded generator and dealt
/// round-robin; the deal counter carries over between strata (visited in
/// label order), so per-fold class counts stay within one of proportional.
CvSplit stratified_kfold(std::span<const int> labels, std::span<const std::string> centers, int k,
                         std::uint64_t seed);

/// n_estimators {60, 100, 140, 180} x max_depth {2, 3, 4, 5}, other fields from `base`.
std::vector<GbtParams> default_param_grid(const GbtParams& base = {});

struct GridPoint {
  GbtParams params;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  std::size_t best = 0;
  std::vector<GridPoint> table;

  const GbtParams& best_params() const { return table.at(best).params; }
};

/// Mean validation accuracy per grid point; ties go to the earliest point.
GridSearchResult grid_search(const FeatureTable& table, std::span<const GbtParams> grid, int k, std::uint64_t seed,
                             int jobs = 1);

/// Mean fold accuracy of one configuration over a fixed split.
double cv_accuracy(const FeatureTable& table, const CvSplit& split, const GbtParams& params, int jobs = 1);

/// Out-of-fold class probabilities, one row per case of `table`.
std::vector<std::vector<double>> out_of_fold_proba(const FeatureTable& table, const CvSplit& split,
                                                   const GbtParams& params, int jobs = 1);

std::string to_json(const GridSearchResult& result);

}  // namespace ipmn
