#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ipmn/volume.hpp"

namespace ipmn {

/// Gray-level indices over a region: 0 marks background, 1..ng foreground.
struct DiscretizedRoi {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  int ng = 2;
  std::vector<int> levels;

  int at(int x, int y, int z) const {
    return levels[static_cast<std::size_t>(x) +
                  static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z))];
  }
  bool inside(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
  }
  /// Level at (x,y,z), or 0 when outside the grid or the mask.
  int level_or_zero(int x, int y, int z) const { return inside(x, y, z) ? at(x, y, z) : 0; }
  std::size_t foreground_count() const;
};

/// Fixed bin count discretization over the foreground:
///   level = floor((x - min) / ((max - min) / ng)) + 1, clamped to ng.
/// A constant region maps entirely to level 1.
DiscretizedRoi discretize(const Volume& v, const Mask& m, int ng);

/// Wraps precomputed levels (0 = background); validates the level range.
DiscretizedRoi make_discretized(Dims dims, Vec3 spacing, int ng, std::vector<int> levels);

/// Ordered (name, value) list returned by every feature family.
class NamedValues {
 public:
  void add(std::string name, double value);
  double at(std::string_view name) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

/// The 13 unique 3D neighbour directions at distance 1 (opposites excluded).
inline constexpr std::array<Index3, 13> kDirections13{{{1, 0, 0},
                                                       {0, 1, 0},
                                                       {0, 0, 1},
                                                       {1, 1, 0},
                                                       {1, -1, 0},
                                                       {1, 0, 1},
                                                       {1, 0, -1},
                                                       {0, 1, 1},
                                                       {0, 1, -1},
                                                       {1, 1, 1},
                                                       {1, 1, -1},
                                                       {1, -1, 1},
                                                       {1, -1, -1}}};

/// Dense row-major matrix indexed from 0; texture matrices store gray level
/// i at row i-1 and size/length j at column j-1.
struct GrayMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  GrayMatrix() = default;
  GrayMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}
  double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double sum() const;
};

// Texture matrices, exposed for invariant checks.

/// Symmetric co-occurrence counts (ng x ng) for one offset, both directions counted.
GrayMatrix glcm_matrix(const DiscretizedRoi& d, const Index3& offset);
/// Run-length matrix (ng x longest-run) for one direction.
GrayMatrix glrlm_matrix(const DiscretizedRoi& d, const Index3& direction);
/// Size-zone matrix (ng x largest-zone) over 26-connected equal-level zones.
GrayMatrix glszm_matrix(const DiscretizedRoi& d);
/// Per-voxel dependence: number of 26-neighbours in the mask sharing the
/// centre's level. Background voxels hold -1.
std::vector<int> gldm_dependence(const DiscretizedRoi& d);
/// Dependence matrix (ng x 27); column j-1 holds dependence j-1, i.e. the
/// column index counts the centre voxel as well.
GrayMatrix gldm_matrix(const DiscretizedRoi& d);

/// Neighbourhood gray-tone difference table: per level, the number of voxels
/// with at least one in-mask neighbour (n) and the summed absolute difference
/// between the level and the neighbour mean (s).
struct NgtdmTable {
  std::vector<double> n;
  std::vector<double> s;
  double valid_voxels = 0.0;
};
NgtdmTable ngtdm_table(const DiscretizedRoi& d);

// Feature families. Degenerate denominators yield 0 unless stated otherwise.

NamedValues glcm_features(const DiscretizedRoi& d);    // 24, averaged over the 13 offsets
NamedValues glrlm_features(const DiscretizedRoi& d);   // 16, averaged over the 13 directions
NamedValues glszm_features(const DiscretizedRoi& d);   // 16
NamedValues gldm_features(const DiscretizedRoi& d);    // 14
NamedValues ngtdm_features(const DiscretizedRoi& d);   // 5; Coarseness capped at kCoarsenessCap
NamedValues firstorder_features(const Volume& v, const Mask& m, int ng = 32);  // 18
NamedValues shape_features(const Mask& m);             // 14

inline constexpr double kCoarsenessCap = 1e6;
inline constexpr int kDefaultBinCount = 32;
inline constexpr std::size_t kFeatureCount = 107;

std::span<const std::string_view> shape_feature_names();
std::span<const std::string_view> firstorder_feature_names();
std::span<const std::string_view> glcm_feature_names();
std::span<const std::string_view> glrlm_feature_names();
std::span<const std::string_view> glszm_feature_names();
std::span<const std::string_view> gldm_feature_names();
std::span<const std::string_view> ngtdm_feature_names();

/// Canonical "family_feature" identifiers of the full vector, in order.
const std::vector<std::string>& canonical_feature_names();

enum class Contrast { t1, t2 };
std::string_view to_string(Contrast c);

struct FeatureVector {
  std::vector<std::string> names;  // canonical order, kFeatureCount entries
  std::vector<double> values;
  Contrast contrast = Contrast::t1;
};

/// shape(14) + firstorder(18) + glcm(24) + glrlm(16) + glszm(16) + gldm(14) + ngtdm(5).
/// The volume/mask pair is first cropped to the mask's tight bounding box, so
/// the result does not depend on where the region sits in the grid.
FeatureVector extract_feature_vector(const Volume& v, const Mask& m, int ng = kDefaultBinCount,
                                     Contrast contrast = Contrast::t1);

}  // namespace ipmn
