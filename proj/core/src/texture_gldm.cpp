#include <vector>

#include "ipmn/radiomics.hpp"
#include "size_matrix.hpp"

namespace ipmn {

std::vector<int> gldm_dependence(const DiscretizedRoi& d) {
  std::vector<int> dep(d.levels.size(), -1);
  std::size_t idx = 0;
  for (int z = 0; z < d.dims[2]; ++z) {
    for (int y = 0; y < d.dims[1]; ++y) {
      for (int x = 0; x < d.dims[0]; ++x, ++idx) {
        const int level = d.levels[idx];
        if (level == 0) continue;
        int count = 0;
        for (int dz = -1; dz <= 1; ++dz) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              if (d.level_or_zero(x + dx, y + dy, z + dz) == level) ++count;
            }
          }
        }
        dep[idx] = count;
      }
    }
  }
  return dep;
}

GrayMatrix gldm_matrix(const DiscretizedRoi& d) {
  GrayMatrix m(d.ng, 27);
  const auto dep = gldm_dependence(d);
  for (std::size_t i = 0; i < dep.size(); ++i) {
    if (dep[i] >= 0) m(d.levels[i] - 1, dep[i]) += 1.0;
  }
  return m;
}

NamedValues gldm_features(const DiscretizedRoi& d) {
  const auto s = detail::size_matrix_stats(gldm_matrix(d));
  const double f[] = {s.entropy,        s.size_nonuniformity, s.size_nonuniformity_n, s.size_variance,
                      s.gray_nonuniformity, s.gray_variance,  s.high_gray,            s.large_emphasis,
                      s.large_high,     s.large_low,          s.low_gray,             s.small_emphasis,
                      s.small_high,     s.small_low};
  const auto names = gldm_feature_names();
  NamedValues out;
  for (std::size_t k = 0; k < names.size(); ++k) out.add(std::string(names[k]), f[k]);
  return out;
}

}  // namespace ipmn
