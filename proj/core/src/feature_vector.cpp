#include <array>
#include <cmath>
#include <string>

#include "ipmn/error.hpp"
#include "ipmn/radiomics.hpp"

namespace ipmn {
namespace {

constexpr std::array<std::string_view, 14> kShape{
    "Elongation",         "Flatness",          "LeastAxisLength",        "MajorAxisLength",
    "Maximum2DDiameterColumn", "Maximum2DDiameterRow", "Maximum2DDiameterSlice", "Maximum3DDiameter",
    "MeshVolume",         "MinorAxisLength",   "Sphericity",             "SurfaceArea",
    "SurfaceVolumeRatio", "VoxelVolume"};

constexpr std::array<std::string_view, 18> kFirstOrder{
    "10Percentile", "90Percentile", "Energy",  "Entropy", "InterquartileRange", "Kurtosis",
    "Maximum",      "MeanAbsoluteDeviation",   "Mean",    "Median",             "Minimum",
    "Range",        "RobustMeanAbsoluteDeviation", "RootMeanSquared", "Skewness", "StandardDeviation",
    "Uniformity",   "Variance"};

constexpr std::array<std::string_view, 24> kGlcm{
    "Autocorrelation", "ClusterProminence", "ClusterShade",       "ClusterTendency", "Contrast",
    "Correlation",     "DifferenceAverage", "DifferenceEntropy",  "DifferenceVariance", "Id",
    "Idm",             "Idmn",              "Idn",                "Imc1",            "Imc2",
    "InverseVariance", "JointAverage",      "JointEnergy",        "JointEntropy",    "MCC",
    "MaximumProbability", "SumAverage",     "SumEntropy",         "SumSquares"};

constexpr std::array<std::string_view, 16> kGlrlm{
    "GrayLevelNonUniformity",   "GrayLevelNonUniformityNormalized", "GrayLevelVariance",
    "HighGrayLevelRunEmphasis", "LongRunEmphasis",                  "LongRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis", "LowGrayLevelRunEmphasis",       "RunEntropy",
    "RunLengthNonUniformity",   "RunLengthNonUniformityNormalized", "RunPercentage",
    "RunVariance",              "ShortRunEmphasis",                 "ShortRunHighGrayLevelEmphasis",
    "ShortRunLowGrayLevelEmphasis"};

constexpr std::array<std::string_view, 16> kGlszm{
    "GrayLevelNonUniformity",    "GrayLevelNonUniformityNormalized", "GrayLevelVariance",
    "HighGrayLevelZoneEmphasis", "LargeAreaEmphasis",                "LargeAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis", "LowGrayLevelZoneEmphasis",     "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized", "SmallAreaEmphasis",          "SmallAreaHighGrayLevelEmphasis",
    "SmallAreaLowGrayLevelEmphasis", "ZoneEntropy",                  "ZonePercentage",
    "ZoneVariance"};

constexpr std::array<std::string_view, 14> kGldm{
    "DependenceEntropy",      "DependenceNonUniformity", "DependenceNonUniformityNormalized",
    "DependenceVariance",     "GrayLevelNonUniformity",  "GrayLevelVariance",
    "HighGrayLevelEmphasis",  "LargeDependenceEmphasis", "LargeDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis", "LowGrayLevelEmphasis", "SmallDependenceEmphasis",
    "SmallDependenceHighGrayLevelEmphasis", "SmallDependenceLowGrayLevelEmphasis"};

constexpr std::array<std::string_view, 5> kNgtdm{"Busyness", "Coarseness", "Complexity", "Contrast", "Strength"};

void append(FeatureVector& out, std::string_view family, const NamedValues& values,
            std::span<const std::string_view> expected) {
  if (values.size() != expected.size()) {
    throw InvalidArgument("feature family " + std::string(family) + " returned the wrong count");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values.names()[k] != expected[k]) {
      throw InvalidArgument("feature family " + std::string(family) + " out of canonical order at " +
                            values.names()[k]);
    }
    out.names.push_back(std::string(family) + "_" + values.names()[k]);
    out.values.push_back(values.values()[k]);
  }
}

}  // namespace

std::span<const std::string_view> shape_feature_names() { return kShape; }
std::span<const std::string_view> firstorder_feature_names() { return kFirstOrder; }
std::span<const std::string_view> glcm_feature_names() { return kGlcm; }
std::span<const std::string_view> glrlm_feature_names() { return kGlrlm; }
std::span<const std::string_view> glszm_feature_names() { return kGlszm; }
std::span<const std::string_view> gldm_feature_names() { return kGldm; }
std::span<const std::string_view> ngtdm_feature_names() { return kNgtdm; }

const std::vector<std::string>& canonical_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    auto add = [&](std::string_view family, std::span<const std::string_view> list) {
      for (auto n : list) out.push_back(std::string(family) + "_" + std::string(n));
    };
    add("shape", kShape);
    add("firstorder", kFirstOrder);
    add("glcm", kGlcm);
    add("glrlm", kGlrlm);
    add("glszm", kGlszm);
    add("gldm", kGldm);
    add("ngtdm", kNgtdm);
    return out;
  }();
  return names;
}

std::string_view to_string(Contrast c) { return c == Contrast::t1 ? "t1" : "t2"; }

FeatureVector extract_feature_vector(const Volume& v, const Mask& m, int ng, Contrast contrast) {
  require_same_geometry(v.geometry(), m.geometry());
  const RoiBox box = mask_bounding_box(m, 0);
  const Volume roi = crop_roi(v, box);
  const Mask roi_mask = crop_roi(m, box);
  const DiscretizedRoi d = discretize(roi, roi_mask, ng);

  FeatureVector out;
  out.contrast = contrast;
  out.names.reserve(kFeatureCount);
  out.values.reserve(kFeatureCount);
  append(out, "shape", shape_features(roi_mask), kShape);
  append(out, "firstorder", firstorder_features(roi, roi_mask, ng), kFirstOrder);
  append(out, "glcm", glcm_features(d), kGlcm);
  append(out, "glrlm", glrlm_features(d), kGlrlm);
  append(out, "glszm", glszm_features(d), kGlszm);
  append(out, "gldm", gldm_features(d), kGldm);
  append(out, "ngtdm", ngtdm_features(d), kNgtdm);

  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!std::isfinite(out.values[k])) throw NumericError("non-finite feature " + out.names[k]);
  }
  return out;
}

}  // namespace ipmn
