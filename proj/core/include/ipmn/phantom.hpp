#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ipmn/clinical.hpp"
#include "ipmn/fusion.hpp"
#include "ipmn/volume.hpp"

namespace ipmn {

/// Per-center acquisition differences: out = scale * in + shift + N(0, noise_sd).
struct PhantomCenter {
  std::string name;
  double scale = 1.0;
  double shift = 0.0;
  double noise_sd = 2.0;
};

/// Texture settings of one class. Between classes the generator interpolates
/// linearly in a jittered severity, so class boundaries are not crisp.
struct ClassTexture {
  double correlation_mm = 1.0;   // sigma of the Gaussian used to colour the noise
  double blob_rate = 0.0;        // Poisson mean of lesion count
  double blob_radius_mm = 2.0;
};

struct PhantomSpec {
  std::array<int, 3> cases_per_class{50, 50, 50};
  std::vector<PhantomCenter> centers{{"center_a", 1.0, 0.0, 3.0}, {"center_b", 1.4, 40.0, 5.0},
                                     {"center_c", 0.7, 15.0, 2.0}};
  Dims dims{64, 64, 64};
  double spacing_mm = 1.0;
  std::array<ClassTexture, 3> class_texture{{{0.8, 0.0, 2.0}, {1.6, 2.0, 2.5}, {2.6, 5.0, 3.5}}};
  double severity_jitter = 0.3;       // sd of per-contrast severity around the class index
  double bias_field_strength = 0.3;   // multiplicative field within [1 - s, 1 + s]
  double volume_effect = 0.10;        // relative semi-axis growth per class step
  double volume_jitter = 0.06;
  std::uint64_t seed = 1;

  std::size_t total_cases() const { return cases_per_class[0] + cases_per_class[1] + cases_per_class[2]; }
};

/// Throws InvalidArgument on nonpositive counts, scales or dims.
void validate(const PhantomSpec& spec);

struct PhantomCase {
  std::string case_id;
  std::string center;
  int label = 0;
  Volume t1;
  Volume t2;
  Mask mask;
  ClinicalRecord clinical;
};

std::string phantom_case_id(std::size_t index);
int phantom_label(const PhantomSpec& spec, std::size_t index);

/// Case `index` of the study; depends only on (spec, index).
PhantomCase generate_case(const PhantomSpec& spec, std::size_t index);

struct StudyIndex {
  std::vector<std::string> case_ids;
  std::vector<std::string> centers;
  std::vector<int> labels;
};

/// Writes <dir>/<case_id>/{t1,t2,mask}.nii.gz, clinical.csv, labels.csv and manifest.json.
StudyIndex generate_study(const PhantomSpec& spec, const std::filesystem::path& dir, int jobs = 1);

/// `case_id,center,label`
StudyIndex read_study_index(const std::filesystem::path& labels_csv);
void write_study_index(const StudyIndex& index, const std::filesystem::path& labels_csv);

/// Stand-in for an external deep-learning classifier: softmax of
/// strength * onehot(label) + N(0, noise) logits, seeded per case.
DlProbabilities synthetic_dl_probabilities(const StudyIndex& study, std::uint64_t seed, double strength = 2.5,
                                           double noise = 1.0);

std::string to_json(const PhantomSpec& spec);
PhantomSpec phantom_spec_from_json(std::string_view json);

}  // namespace ipmn
