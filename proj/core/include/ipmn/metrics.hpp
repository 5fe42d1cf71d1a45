#pragma once

#include <span>
#include <string>
#include <vector>

#include "ipmn/volume.hpp"

namespace ipmn {

double accuracy(std::span<const int> preds, std::span<const int> labels);

struct PrecisionRecall {
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  std::vector<double> per_class_precision;
  std::vector<double> per_class_recall;
  std::vector<int> support;
};

/// Macro averages over `n_classes`. A class never predicted has precision 0;
/// a class absent from the labels has recall 0.
PrecisionRecall macro_precision_recall(std::span<const int> preds, std::span<const int> labels, int n_classes = 3);

/// Mann-Whitney AUC of scores for positives vs negatives, ties counted half.
double binary_auc(std::span<const double> scores, std::span<const bool> positive);

/// One-vs-rest AUC per class averaged over classes that have at least one
/// positive and one negative. Throws InvalidArgument with fewer than two
/// distinct labels.
double auc_ovr_macro(std::span<const std::vector<double>> probs, std::span<const int> labels);

struct RocPoint {
  int cls = 0;
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// One-vs-rest ROC curves, one point per distinct score plus the origin.
std::vector<RocPoint> roc_points(std::span<const std::vector<double>> probs, std::span<const int> labels);

double dice(const Mask& a, const Mask& b);

/// Foreground voxels with a background 6-neighbour or on the grid edge.
Mask mask_boundary(const Mask& m);

/// Exact Euclidean distance (mm) from every voxel to the nearest nonzero
/// voxel of `seeds`; separable lower-envelope transform with voxel spacing.
std::vector<double> distance_transform(const Mask& seeds);

/// Max of the two directed 95th-percentile boundary-to-boundary distances, in mm.
double hd95(const Mask& a, const Mask& b);

struct EvaluationReport {
  std::size_t n = 0;
  double acc = 0.0;
  double auc = 0.0;
  PrecisionRecall pr;
};

EvaluationReport evaluate(std::span<const std::vector<double>> probs, std::span<const int> labels);

/// {acc, auc, pr, rc, per_class, n, auc_averaging}
std::string to_json(const EvaluationReport& report);

}  // namespace ipmn
