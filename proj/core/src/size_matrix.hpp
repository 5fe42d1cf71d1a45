#pragma once

#include "ipmn/radiomics.hpp"

namespace ipmn::detail {

/// Shared statistics of a (gray level i) x (size j) count matrix, the common
/// core of run-length, size-zone and dependence features. With N the total
/// count and p = R/N:
struct SizeMatrixStats {
  double total = 0.0;                  // N
  double small_emphasis = 0.0;         // sum p / j^2
  double large_emphasis = 0.0;         // sum p j^2
  double gray_nonuniformity = 0.0;     // sum_i (sum_j R)^2 / N
  double gray_nonuniformity_n = 0.0;   // sum_i (sum_j R)^2 / N^2
  double size_nonuniformity = 0.0;     // sum_j (sum_i R)^2 / N
  double size_nonuniformity_n = 0.0;   // sum_j (sum_i R)^2 / N^2
  double gray_variance = 0.0;          // sum p (i - mu_i)^2
  double size_variance = 0.0;          // sum p (j - mu_j)^2
  double entropy = 0.0;                // -sum p log2 p
  double low_gray = 0.0;               // sum p / i^2
  double high_gray = 0.0;              // sum p i^2
  double small_low = 0.0;              // sum p / (i^2 j^2)
  double small_high = 0.0;             // sum p i^2 / j^2
  double large_low = 0.0;              // sum p j^2 / i^2
  double large_high = 0.0;             // sum p i^2 j^2
};

/// All fields stay zero for an empty matrix.
SizeMatrixStats size_matrix_stats(const GrayMatrix& m);

}  // namespace ipmn::detail
