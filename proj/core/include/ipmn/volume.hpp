#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ipmn {

using Dims = std::array<int, 3>;
using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;
/// Row-major 3x3; column c is the world (RAS+) direction of voxel axis c.
using Mat3 = std::array<Vec3, 3>;

inline constexpr Mat3 kIdentity3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

/// Voxel grid placement shared by a volume and its mask.
struct Geometry {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Mat3 direction = kIdentity3;
  Vec3 origin{0.0, 0.0, 0.0};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  /// x varies fastest (NIfTI order).
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
  }
  bool contains(long x, long y, long z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
  }
  /// World position (mm) of a continuous voxel coordinate.
  Vec3 world(double i, double j, double k) const;
  double voxel_volume_mm3() const { return spacing[0] * spacing[1] * spacing[2]; }

  bool operator==(const Geometry&) const = default;
};

/// Throws GeometryError on nonpositive dims/spacing or non-unit direction columns.
void validate_geometry(const Geometry& g);

/// Dense scalar grid with immutable contents.
template <typename T>
class Image {
 public:
  using value_type = T;

  /// One zero voxel; a placeholder until assigned.
  Image() : data_(1, T{}) {}
  Image(Geometry geometry, std::vector<T> data);
  static Image filled(const Geometry& geometry, T value) {
    return Image(geometry, std::vector<T>(geometry.voxel_count(), value));
  }

  const Geometry& geometry() const noexcept { return geometry_; }
  const Dims& dims() const noexcept { return geometry_.dims; }
  const Vec3& spacing() const noexcept { return geometry_.spacing; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const T> data() const noexcept { return data_; }

  T operator()(int x, int y, int z) const { return data_[geometry_.index(x, y, z)]; }
  T operator[](std::size_t i) const { return data_[i]; }

  bool operator==(const Image&) const = default;

 private:
  Geometry geometry_;
  std::vector<T> data_;
};

/// Real-valued image; every voxel is finite.
using Volume = Image<double>;
/// Binary label image (0 background, 1 foreground).
using Mask = Image<std::uint8_t>;

extern template class Image<double>;
extern template class Image<std::uint8_t>;

/// Axis-aligned voxel box, lo inclusive, hi exclusive.
struct RoiBox {
  Index3 lo{0, 0, 0};
  Index3 hi{0, 0, 0};
  int margin_vox = 0;

  Dims extent() const { return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}; }
  bool operator==(const RoiBox&) const = default;
};

enum class Interpolation { linear, nearest };

std::size_t foreground_count(const Mask& m);
/// Binarizes any real volume: value > 0 becomes foreground.
Mask to_mask(const Volume& v);
Volume to_volume(const Mask& m);
/// Throws GeometryError unless the two geometries match exactly.
void require_same_geometry(const Geometry& a, const Geometry& b);

/// Permutes/flips voxel axes so that the direction matrix becomes identity (RAS+).
/// Only signed axis permutations are supported; oblique inputs throw GeometryError.
Volume reorient_ras(const Volume& v);
Mask reorient_ras(const Mask& m);

/// Resamples onto a grid with isotropic spacing `target_mm`, sharing the origin.
Volume resample_isotropic(const Volume& v, double target_mm, Interpolation mode = Interpolation::linear);
Mask resample_isotropic(const Mask& m, double target_mm);

/// Tight foreground box dilated by `margin_vox` and clipped to the grid.
RoiBox mask_bounding_box(const Mask& m, int margin_vox);

Volume crop_roi(const Volume& v, const RoiBox& box);
Mask crop_roi(const Mask& m, const RoiBox& box);

}  // namespace ipmn
