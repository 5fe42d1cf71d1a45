#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ipmn/cross_validation.hpp"
#include "ipmn/feature_table.hpp"
#include "ipmn/fusion.hpp"
#include "ipmn/gbt.hpp"
#include "ipmn/metrics.hpp"
#include "ipmn/preprocess.hpp"
#include "ipmn/radiomics.hpp"
#include "ipmn/volume.hpp"

namespace ipmn {

struct PreprocessSettings {
  double resample_mm = 1.0;
  double bias_sigma_mm = 30.0;
  int median_radius = 1;
  int roi_margin_vox = 5;
};

struct PreprocessedCase {
  Volume t1;
  Volume t2;
  Mask mask;
  RoiBox roi;
};

/// Reorient to RAS, resample, bias-correct, denoise, then crop both contrasts
/// and the mask to the ROI box. Throws GeometryError when the three inputs do
/// not share a grid.
PreprocessedCase preprocess_case(const Volume& t1, const Volume& t2, const Mask& mask, const PreprocessSettings& s);
/// Single-contrast variant; returns the processed full-size volume.
Volume preprocess_volume(const Volume& v, const PreprocessSettings& s);

/// Prefixes the canonical feature names with "<contrast>_".
std::vector<std::string> contrast_feature_names(Contrast c);

struct PipelineConfig {
  std::filesystem::path study_dir;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> dl_probabilities;
  std::optional<std::uint64_t> seed;  // required
  int jobs = 1;

  double test_fraction = 0.2;
  int cv_folds = 5;
  PreprocessSettings preprocess;
  std::vector<double> nyul_ranks = default_nyul_ranks();
  int bin_count = kDefaultBinCount;

  bool impute_clinical = false;
  double p_enter = 0.05;
  double p_remove = 0.10;

  GbtParams gbt;  // learning_rate, min_leaf, lambda shared by every grid point
  std::vector<int> grid_n_estimators{60, 100, 140, 180};
  std::vector<int> grid_max_depth{2, 3, 4, 5};

  std::vector<double> k_grid = default_k_grid();
  std::vector<double> t_grid = default_t_grid();

  bool ablation = true;
  /// Test hook: fit the scaler with one blind-test case included.
  bool debug_pollute_scaler = false;
};

/// Nested JSON; unknown keys are rejected so typos do not pass silently.
PipelineConfig pipeline_config_from_json(std::string_view json);
std::string to_json(const PipelineConfig& config);

/// Training case-id lists of every fitted artifact, by artifact name.
using TrainingLists = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Throws LeakageError naming the artifact and case when a test id appears in
/// any training list.
void check_leakage(const std::vector<std::string>& test_ids, const TrainingLists& artifacts);

struct AblationResult {
  double t1 = 0.0;
  double t2 = 0.0;
  double t1_t2 = 0.0;
  double t1_t2_clinical = 0.0;
};

struct PipelineResult {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> selected_clinical;
  GbtParams best_params;
  EvaluationReport radiomics;
  std::optional<EvaluationReport> fused;
  std::optional<FusionParams> fusion_params;
  std::optional<AblationResult> ablation;
  double seconds = 0.0;
};

/// End-to-end run; writes every artifact under config.out_dir. Output files
/// carry no timestamps, so reruns with the same inputs are byte-identical.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace ipmn
