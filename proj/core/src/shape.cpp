// 3D shape descriptors on the voxel representation: volume is the voxel count
// times the voxel volume and surface area counts exposed voxel faces.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ipmn/error.hpp"
#include "ipmn/radiomics.hpp"

namespace ipmn {

NamedValues shape_features(const Mask& mask) {
  const RoiBox box = mask_bounding_box(mask, 0);
  const Mask m = crop_roi(mask, box);
  const Dims& d = m.dims();
  const Vec3& sp = m.spacing();

  auto fg = [&](int x, int y, int z) { return m.geometry().contains(x, y, z) && m(x, y, z) != 0; };

  const std::array<double, 3> face_area{sp[1] * sp[2], sp[0] * sp[2], sp[0] * sp[1]};
  double count = 0.0, area = 0.0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> points;
  std::vector<Index3> boundary;
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (!m(x, y, z)) continue;
        count += 1.0;
        const Eigen::Vector3d p(x * sp[0], y * sp[1], z * sp[2]);
        points.push_back(p);
        sum += p;
        int exposed = 0;
        for (int a = 0; a < 3; ++a) {
          for (int s : {-1, 1}) {
            Index3 q{x, y, z};
            q[a] += s;
            if (!fg(q[0], q[1], q[2])) {
              area += face_area[a];
              ++exposed;
            }
          }
        }
        if (exposed > 0) boundary.push_back({x, y, z});
      }
    }
  }

  const double volume = count * m.geometry().voxel_volume_mm3();
  const double sphericity = std::cbrt(36.0 * std::numbers::pi * volume * volume) / area;

  // Extreme pairs are convex hull vertices, which always lie on the boundary.
  double d3 = 0.0, d_slice = 0.0, d_column = 0.0, d_row = 0.0;
  for (std::size_t a = 0; a < boundary.size(); ++a) {
    for (std::size_t b = a + 1; b < boundary.size(); ++b) {
      const double dx = (boundary[a][0] - boundary[b][0]) * sp[0];
      const double dy = (boundary[a][1] - boundary[b][1]) * sp[1];
      const double dz = (boundary[a][2] - boundary[b][2]) * sp[2];
      const double dist2 = dx * dx + dy * dy + dz * dz;
      d3 = std::max(d3, dist2);
      if (boundary[a][2] == boundary[b][2]) d_slice = std::max(d_slice, dist2);
      if (boundary[a][1] == boundary[b][1]) d_column = std::max(d_column, dist2);
      if (boundary[a][0] == boundary[b][0]) d_row = std::max(d_row, dist2);
    }
  }

  // Principal axes from the population covariance of voxel centres.
  const Eigen::Vector3d mean = sum / count;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d c = p - mean;
    cov += c * c.transpose();
  }
  cov /= count;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov, Eigen::EigenvaluesOnly);
  // Ascending: least, minor, major.
  const double least = std::max(0.0, solver.eigenvalues()(0));
  const double minor = std::max(0.0, solver.eigenvalues()(1));
  const double major = std::max(0.0, solver.eigenvalues()(2));

  NamedValues out;
  out.add("Elongation", major > 0.0 ? std::sqrt(minor / major) : 0.0);
  out.add("Flatness", major > 0.0 ? std::sqrt(least / major) : 0.0);
  out.add("LeastAxisLength", 4.0 * std::sqrt(least));
  out.add("MajorAxisLength", 4.0 * std::sqrt(major));
  out.add("Maximum2DDiameterColumn", std::sqrt(d_column));
  out.add("Maximum2DDiameterRow", std::sqrt(d_row));
  out.add("Maximum2DDiameterSlice", std::sqrt(d_slice));
  out.add("Maximum3DDiameter", std::sqrt(d3));
  out.add("MeshVolume", volume);
  out.add("MinorAxisLength", 4.0 * std::sqrt(minor));
  out.add("Sphericity", sphericity);
  out.add("SurfaceArea", area);
  out.add("SurfaceVolumeRatio", area / volume);
  out.add("VoxelVolume", volume);
  return out;
}

}  // namespace ipmn
