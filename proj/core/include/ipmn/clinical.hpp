#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipmn/feature_table.hpp"
#include "ipmn/stats.hpp"
#include "ipmn/volume.hpp"

namespace ipmn {

/// Clinical covariates in CSV column order.
inline constexpr std::array<std::string_view, 8> kClinicalColumns{
    "diabetes", "volume_ml", "diagonal_mm", "vol_over_diag", "age", "gender", "bmi", "chronic_pancreatitis"};

struct ClinicalRecord {
  std::string case_id;
  /// Indexed like kClinicalColumns; NaN marks a missing cell.
  std::array<double, kClinicalColumns.size()> values{};
  int label = 0;

  double diabetes() const { return values[0]; }
  double volume_ml() const { return values[1]; }
  double diagonal_mm() const { return values[2]; }
  double vol_over_diag() const { return values[3]; }
};

/// Foreground voxel count times voxel volume, in millilitres.
double mask_volume_ml(const Mask& m);
/// Physical diagonal (mm) of the tight voxel bounding box of the foreground.
double mask_diagonal_mm(const Mask& m);

/// Fills the mask-derived fields (volume, diagonal, their quotient).
void set_mask_covariates(ClinicalRecord& record, const Mask& m);

/// `case_id,diabetes,volume_ml,diagonal_mm,vol_over_diag,age,gender,bmi,chronic_pancreatitis,label`.
/// Empty cells are read as missing. vol_over_diag is recomputed from its
/// inputs whenever both are present.
std::vector<ClinicalRecord> read_clinical_csv(const std::filesystem::path& path);
void write_clinical_csv(std::span<const ClinicalRecord> records, const std::filesystem::path& path);

/// Throws DataError naming the first case with a missing covariate.
void require_complete(std::span<const ClinicalRecord> records);
/// Replaces missing cells with per-column means over `reference` rows.
void impute_mean(std::vector<ClinicalRecord>& records, std::span<const std::size_t> reference);

/// Columns "clinical_<name>" for the requested covariates.
FeatureTable clinical_feature_table(std::span<const ClinicalRecord> records, std::span<const std::size_t> covariates);

/// Screening output: OLS over all covariates, stepwise selection, and a Welch
/// t-test per covariate between the healthy and high-risk groups.
struct ClinicalScreening {
  OlsResult full_fit;
  StepwiseResult stepwise;
  std::array<TTestResult, kClinicalColumns.size()> healthy_vs_high{};
  std::vector<std::string> training_case_ids;
};

/// OLS target is the ordinal label {0, 1, 2}.
ClinicalScreening screen_clinical(std::span<const ClinicalRecord> records, double p_enter = 0.05,
                                  double p_remove = 0.10);

std::string to_json(const ClinicalScreening& screening);

}  // namespace ipmn
