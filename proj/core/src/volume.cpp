#include "ipmn/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ipmn/error.hpp"

namespace ipmn {

Vec3 Geometry::world(double i, double j, double k) const {
  const Vec3 scaled{i * spacing[0], j * spacing[1], k * spacing[2]};
  Vec3 out = origin;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out[r] += direction[r][c] * scaled[c];
  }
  return out;
}

void validate_geometry(const Geometry& g) {
  for (int a = 0; a < 3; ++a) {
    if (g.dims[a] <= 0) throw GeometryError("nonpositive dimension on axis " + std::to_string(a));
    if (!(g.spacing[a] > 0.0) || !std::isfinite(g.spacing[a])) {
      throw GeometryError("nonpositive spacing on axis " + std::to_string(a));
    }
    if (!std::isfinite(g.origin[a])) throw GeometryError("non-finite origin");
    double norm2 = 0.0;
    for (int r = 0; r < 3; ++r) norm2 += g.direction[r][a] * g.direction[r][a];
    if (std::abs(norm2 - 1.0) > 1e-6) {
      throw GeometryError("direction column " + std::to_string(a) + " is not unit norm");
    }
  }
}

namespace {

void validate_values(std::span<const double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw InvalidArgument("volume contains NaN or Inf voxels");
  }
}

void validate_values(std::span<const std::uint8_t> data) {
  for (auto v : data) {
    if (v > 1) throw InvalidArgument("mask voxels must be 0 or 1");
  }
}

}  // namespace

template <typename T>
Image<T>::Image(Geometry geometry, std::vector<T> data)
    : geometry_(geometry), data_(std::move(data)) {
  validate_geometry(geometry_);
  if (data_.size() != geometry_.voxel_count()) {
    throw InvalidArgument("voxel data length " + std::to_string(data_.size()) +
                          " does not match dims product " + std::to_string(geometry_.voxel_count()));
  }
  validate_values(std::span<const T>(data_));
}

template class Image<double>;
template class Image<std::uint8_t>;

std::size_t foreground_count(const Mask& m) {
  return static_cast<std::size_t>(std::count(m.data().begin(), m.data().end(), std::uint8_t{1}));
}

Mask to_mask(const Volume& v) {
  std::vector<std::uint8_t> out(v.size());
  std::transform(v.data().begin(), v.data().end(), out.begin(),
                 [](double x) { return static_cast<std::uint8_t>(x > 0.0 ? 1 : 0); });
  return Mask(v.geometry(), std::move(out));
}

Volume to_volume(const Mask& m) {
  return Volume(m.geometry(), std::vector<double>(m.data().begin(), m.data().end()));
}

void require_same_geometry(const Geometry& a, const Geometry& b) {
  if (!(a == b)) throw GeometryError("volume and mask geometries differ");
}

namespace {

struct AxisMap {
  std::array<int, 3> source_axis{};  // output axis r reads input axis source_axis[r]
  std::array<bool, 3> flipped{};
};

AxisMap ras_axis_map(const Geometry& g) {
  AxisMap map;
  std::array<bool, 3> used{};
  for (int r = 0; r < 3; ++r) {
    int found = -1;
    for (int c = 0; c < 3; ++c) {
      const double d = g.direction[r][c];
      if (std::abs(std::abs(d) - 1.0) < 1e-6) {
        found = c;
        map.flipped[r] = d < 0.0;
      } else if (std::abs(d) > 1e-6) {
        throw GeometryError("oblique orientation is not supported by RAS reorientation");
      }
    }
    if (found < 0 || used[found]) {
      throw GeometryError("orientation matrix is not a signed axis permutation");
    }
    used[found] = true;
    map.source_axis[r] = found;
  }
  return map;
}

template <typename T>
Image<T> reorient_impl(const Image<T>& in) {
  const Geometry& g = in.geometry();
  const AxisMap map = ras_axis_map(g);

  Geometry out_g;
  for (int r = 0; r < 3; ++r) {
    out_g.dims[r] = g.dims[map.source_axis[r]];
    out_g.spacing[r] = g.spacing[map.source_axis[r]];
  }
  out_g.direction = kIdentity3;

  auto source_index = [&](const Index3& o) {
    Index3 src{};
    for (int r = 0; r < 3; ++r) {
      const int k = map.source_axis[r];
      src[k] = map.flipped[r] ? g.dims[k] - 1 - o[r] : o[r];
    }
    return src;
  };
  const Index3 first = source_index({0, 0, 0});
  out_g.origin = g.world(first[0], first[1], first[2]);

  std::vector<T> data(out_g.voxel_count());
  std::size_t n = 0;
  for (int z = 0; z < out_g.dims[2]; ++z) {
    for (int y = 0; y < out_g.dims[1]; ++y) {
      for (int x = 0; x < out_g.dims[0]; ++x) {
        const Index3 s = source_index({x, y, z});
        data[n++] = in(s[0], s[1], s[2]);
      }
    }
  }
  return Image<T>(out_g, std::move(data));
}

Geometry isotropic_geometry(const Geometry& g, double target_mm) {
  if (!(target_mm > 0.0) || !std::isfinite(target_mm)) {
    throw InvalidArgument("resample target spacing must be positive");
  }
  Geometry out = g;
  for (int a = 0; a < 3; ++a) {
    const double extent = g.dims[a] * g.spacing[a] / target_mm;
    out.dims[a] = std::max(1, static_cast<int>(std::ceil(extent - 1e-9)));
    out.spacing[a] = target_mm;
  }
  return out;
}

// Continuous source coordinate of output voxel `j` on an axis, clamped to the grid.
double source_coordinate(int j, double out_spacing, double in_spacing, int in_dim) {
  const double x = j * out_spacing / in_spacing;
  return std::clamp(x, 0.0, static_cast<double>(in_dim - 1));
}

}  // namespace

Volume reorient_ras(const Volume& v) { return reorient_impl(v); }
Mask reorient_ras(const Mask& m) { return reorient_impl(m); }

Volume resample_isotropic(const Volume& v, double target_mm, Interpolation mode) {
  const Geometry& g = v.geometry();
  const Geometry out_g = isotropic_geometry(g, target_mm);

  // Per-axis lower index and weight, computed once.
  std::array<std::vector<int>, 3> lo;
  std::array<std::vector<double>, 3> w;
  for (int a = 0; a < 3; ++a) {
    lo[a].resize(out_g.dims[a]);
    w[a].resize(out_g.dims[a]);
    for (int j = 0; j < out_g.dims[a]; ++j) {
      const double x = source_coordinate(j, target_mm, g.spacing[a], g.dims[a]);
      if (mode == Interpolation::nearest) {
        lo[a][j] = std::min(static_cast<int>(std::floor(x + 0.5)), g.dims[a] - 1);
        w[a][j] = 0.0;
      } else {
        const int i0 = std::min(static_cast<int>(std::floor(x)), g.dims[a] - 1);
        lo[a][j] = i0;
        w[a][j] = x - i0;
      }
    }
  }

  // v0 + w*(v1 - v0) keeps constant inputs exactly constant.
  auto lerp = [](double a, double b, double t) { return t == 0.0 ? a : a + t * (b - a); };
  auto next = [&](int axis, int i) { return std::min(i + 1, g.dims[axis] - 1); };

  std::vector<double> data(out_g.voxel_count());
  std::size_t n = 0;
  for (int z = 0; z < out_g.dims[2]; ++z) {
    const int z0 = lo[2][z], z1 = next(2, z0);
    const double wz = w[2][z];
    for (int y = 0; y < out_g.dims[1]; ++y) {
      const int y0 = lo[1][y], y1 = next(1, y0);
      const double wy = w[1][y];
      for (int x = 0; x < out_g.dims[0]; ++x) {
        const int x0 = lo[0][x], x1 = next(0, x0);
        const double wx = w[0][x];
        const double c00 = lerp(v(x0, y0, z0), v(x1, y0, z0), wx);
        const double c10 = lerp(v(x0, y1, z0), v(x1, y1, z0), wx);
        const double c01 = lerp(v(x0, y0, z1), v(x1, y0, z1), wx);
        const double c11 = lerp(v(x0, y1, z1), v(x1, y1, z1), wx);
        data[n++] = lerp(lerp(c00, c10, wy), lerp(c01, c11, wy), wz);
      }
    }
  }
  return Volume(out_g, std::move(data));
}

Mask resample_isotropic(const Mask& m, double target_mm) {
  return to_mask(resample_isotropic(to_volume(m), target_mm, Interpolation::nearest));
}

RoiBox mask_bounding_box(const Mask& m, int margin_vox) {
  if (margin_vox < 0) throw InvalidArgument("ROI margin must be non-negative");
  const Dims& d = m.dims();
  Index3 lo{d[0], d[1], d[2]};
  Index3 hi{-1, -1, -1};
  bool any = false;
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (!m(x, y, z)) continue;
        any = true;
        const Index3 p{x, y, z};
        for (int a = 0; a < 3; ++a) {
          lo[a] = std::min(lo[a], p[a]);
          hi[a] = std::max(hi[a], p[a]);
        }
      }
    }
  }
  if (!any) throw InvalidArgument("mask has no foreground voxels");
  RoiBox box;
  box.margin_vox = margin_vox;
  for (int a = 0; a < 3; ++a) {
    box.lo[a] = std::max(0, lo[a] - margin_vox);
    box.hi[a] = std::min(d[a], hi[a] + 1 + margin_vox);
  }
  return box;
}

namespace {

template <typename T>
Image<T> crop_impl(const Image<T>& in, const RoiBox& box) {
  const Geometry& g = in.geometry();
  for (int a = 0; a < 3; ++a) {
    if (box.lo[a] < 0 || box.hi[a] > g.dims[a] || box.lo[a] >= box.hi[a]) {
      throw GeometryError("ROI box out of bounds on axis " + std::to_string(a));
    }
  }
  Geometry out_g = g;
  out_g.dims = box.extent();
  out_g.origin = g.world(box.lo[0], box.lo[1], box.lo[2]);

  std::vector<T> data;
  data.reserve(out_g.voxel_count());
  for (int z = box.lo[2]; z < box.hi[2]; ++z) {
    for (int y = box.lo[1]; y < box.hi[1]; ++y) {
      const std::size_t row = g.index(box.lo[0], y, z);
      const auto src = in.data().subspan(row, static_cast<std::size_t>(out_g.dims[0]));
      data.insert(data.end(), src.begin(), src.end());
    }
  }
  return Image<T>(out_g, std::move(data));
}

}  // namespace

Volume crop_roi(const Volume& v, const RoiBox& box) { return crop_impl(v, box); }
Mask crop_roi(const Mask& m, const RoiBox& box) { return crop_impl(m, box); }

}  // namespace ipmn
