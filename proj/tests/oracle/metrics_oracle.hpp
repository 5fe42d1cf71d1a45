#pragma once
// Brute-force references for classification and segmentation metrics.

#include <array>
#include <vector>

namespace oracle {

/// Macro one-vs-rest AUC by enumerating every (positive, negative) pair.
double auc_pairs(const std::vector<std::vector<double>>& probs, const std::vector<int>& labels);

struct Confusion {
  double acc, pr, rc;
};
Confusion confusion(const std::vector<int>& preds, const std::vector<int>& labels, int n_classes);

struct MaskGrid {
  std::array<int, 3> dims;
  std::array<double, 3> spacing;
  std::vector<int> on;
};

double dice(const MaskGrid& a, const MaskGrid& b);
/// Directed distances by comparing every boundary voxel with every other.
double hd95(const MaskGrid& a, const MaskGrid& b);

}  // namespace oracle
