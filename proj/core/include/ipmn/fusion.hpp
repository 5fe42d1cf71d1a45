#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ipmn {

using ProbabilityVector = std::vector<double>;

struct FusionParams {
  double k = 0.0;  // weight of the deep-learning vector
  double t = 0.0;  // radiomics confidence gate, in (0, 1.01]

  bool operator==(const FusionParams&) const = default;
};

/// Throws InvalidArgument unless every component is in [0, 1] and the sum is 1 within `tol`.
void validate_probability(std::span<const double> p, double tol = 1e-9);
void validate(const FusionParams& params);

/// max(p_r) >= t ? p_r : k * p_d + (1 - k) * p_r
ProbabilityVector fuse(std::span<const double> p_d, std::span<const double> p_r, const FusionParams& params);

/// Index of the largest component; ties go to the lowest index.
int argmax(std::span<const double> p);

/// {0.0, 0.1, ..., 1.0}
std::vector<double> default_k_grid();
/// {0.34, 0.40, ..., 1.00, 1.01}
std::vector<double> default_t_grid();

struct FusionCase {
  ProbabilityVector p_d;
  ProbabilityVector p_r;
  int label = 0;
};

struct FusionGridResult {
  FusionParams best;
  double best_accuracy = 0.0;
  std::vector<double> k_grid;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> accuracy;  // [t index][k index]
};

/// Exhaustive fused-argmax accuracy over the grid; ties go to the smallest t,
/// then the smallest k.
FusionGridResult fusion_grid_search(std::span<const FusionCase> cases, std::span<const double> k_grid,
                                    std::span<const double> t_grid);

double fused_accuracy(std::span<const FusionCase> cases, const FusionParams& params);

struct DlProbabilities {
  std::vector<std::string> case_ids;
  std::vector<ProbabilityVector> probs;

  const ProbabilityVector& at(const std::string& case_id) const;
};

/// `case_id,p_healthy,p_low,p_high`; rows must sum to 1 within 1e-6.
DlProbabilities read_dl_probabilities(const std::filesystem::path& path);
void write_dl_probabilities(const DlProbabilities& dl, const std::filesystem::path& path);

std::string to_json(const FusionGridResult& result);

}  // namespace ipmn
