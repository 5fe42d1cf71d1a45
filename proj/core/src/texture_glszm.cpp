#include <algorithm>
#include <vector>

#include "ipmn/radiomics.hpp"
#include "size_matrix.hpp"

namespace ipmn {

GrayMatrix glszm_matrix(const DiscretizedRoi& d) {
  const std::size_t n = d.levels.size();
  std::vector<char> visited(n, 0);
  std::vector<std::pair<int, int>> zones;  // (level, size)
  std::vector<Index3> stack;
  int largest = 1;

  for (int z = 0; z < d.dims[2]; ++z) {
    for (int y = 0; y < d.dims[1]; ++y) {
      for (int x = 0; x < d.dims[0]; ++x) {
        const std::size_t idx = static_cast<std::size_t>(x) + static_cast<std::size_t>(d.dims[0]) * (y + static_cast<std::size_t>(d.dims[1]) * z);
        const int level = d.levels[idx];
        if (level == 0 || visited[idx]) continue;
        visited[idx] = 1;
        stack.assign(1, {x, y, z});
        int size = 0;
        while (!stack.empty()) {
          const Index3 p = stack.back();
          stack.pop_back();
          ++size;
          for (int dz = -1; dz <= 1; ++dz) {
            for (int dy = -1; dy <= 1; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                const int qx = p[0] + dx, qy = p[1] + dy, qz = p[2] + dz;
                if (!d.inside(qx, qy, qz)) continue;
                const std::size_t q = static_cast<std::size_t>(qx) + static_cast<std::size_t>(d.dims[0]) * (qy + static_cast<std::size_t>(d.dims[1]) * qz);
                if (visited[q] || d.levels[q] != level) continue;
                visited[q] = 1;
                stack.push_back({qx, qy, qz});
              }
            }
          }
        }
        zones.emplace_back(level, size);
        largest = std::max(largest, size);
      }
    }
  }

  GrayMatrix m(d.ng, largest);
  for (const auto& [level, size] : zones) m(level - 1, size - 1) += 1.0;
  return m;
}

NamedValues glszm_features(const DiscretizedRoi& d) {
  const auto s = detail::size_matrix_stats(glszm_matrix(d));
  const double voxels = static_cast<double>(d.foreground_count());
  const double zone_pct = voxels > 0.0 ? s.total / voxels : 0.0;
  const double f[] = {s.gray_nonuniformity, s.gray_nonuniformity_n, s.gray_variance,  s.high_gray,
                      s.large_emphasis,     s.large_high,           s.large_low,      s.low_gray,
                      s.size_nonuniformity, s.size_nonuniformity_n, s.small_emphasis, s.small_high,
                      s.small_low,          s.entropy,              zone_pct,         s.size_variance};
  const auto names = glszm_feature_names();
  NamedValues out;
  for (std::size_t k = 0; k < names.size(); ++k) out.add(std::string(names[k]), f[k]);
  return out;
}

}  // namespace ipmn
