#include <cmath>
#include <vector>

#include "ipmn/radiomics.hpp"

namespace ipmn {

NgtdmTable ngtdm_table(const DiscretizedRoi& d) {
  NgtdmTable t;
  t.n.assign(d.ng, 0.0);
  t.s.assign(d.ng, 0.0);
  std::size_t idx = 0;
  for (int z = 0; z < d.dims[2]; ++z) {
    for (int y = 0; y < d.dims[1]; ++y) {
      for (int x = 0; x < d.dims[0]; ++x, ++idx) {
        const int level = d.levels[idx];
        if (level == 0) continue;
        double sum = 0.0;
        int count = 0;
        for (int dz = -1; dz <= 1; ++dz) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              const int nb = d.level_or_zero(x + dx, y + dy, z + dz);
              if (nb == 0) continue;
              sum += nb;
              ++count;
            }
          }
        }
        // Voxels without any in-mask neighbour are excluded.
        if (count == 0) continue;
        t.n[level - 1] += 1.0;
        t.s[level - 1] += std::abs(level - sum / count);
        t.valid_voxels += 1.0;
      }
    }
  }
  return t;
}

NamedValues ngtdm_features(const DiscretizedRoi& d) {
  const NgtdmTable t = ngtdm_table(d);
  const int ng = d.ng;
  const double nv = t.valid_voxels;

  double coarseness = kCoarsenessCap, contrast = 0.0, busyness = 0.0, complexity = 0.0, strength = 0.0;
  if (nv > 0.0) {
    std::vector<double> p(ng);
    int ngp = 0;
    double s_total = 0.0, ps_sum = 0.0;
    for (int i = 0; i < ng; ++i) {
      p[i] = t.n[i] / nv;
      if (p[i] > 0.0) ++ngp;
      s_total += t.s[i];
      ps_sum += p[i] * t.s[i];
    }

    // Coarseness = 1 / sum p_i s_i, capped for flat regions.
    coarseness = ps_sum > 0.0 ? std::min(1.0 / ps_sum, kCoarsenessCap) : kCoarsenessCap;

    double pair_contrast = 0.0, busy_denom = 0.0, strength_num = 0.0;
    for (int i = 0; i < ng; ++i) {
      if (p[i] == 0.0) continue;
      const double li = i + 1;
      for (int j = 0; j < ng; ++j) {
        if (p[j] == 0.0) continue;
        const double lj = j + 1;
        const double diff2 = (li - lj) * (li - lj);
        pair_contrast += p[i] * p[j] * diff2;
        busy_denom += std::abs(li * p[i] - lj * p[j]);
        complexity += std::abs(li - lj) * (p[i] * t.s[i] + p[j] * t.s[j]) / (p[i] + p[j]);
        strength_num += (p[i] + p[j]) * diff2;
      }
    }
    // Contrast = [sum p_i p_j (i-j)^2 / (Ngp (Ngp-1))] * [sum s_i / Nv]
    if (ngp > 1) contrast = pair_contrast / (ngp * (ngp - 1.0)) * s_total / nv;
    // Busyness = sum p_i s_i / sum |i p_i - j p_j|
    busyness = busy_denom > 0.0 ? ps_sum / busy_denom : 0.0;
    // Complexity = sum |i-j| (p_i s_i + p_j s_j) / (p_i + p_j) / Nv
    complexity /= nv;
    // Strength = sum (p_i + p_j)(i-j)^2 / sum s_i
    strength = s_total > 0.0 ? strength_num / s_total : 0.0;
  }

  NamedValues out;
  out.add("Busyness", busyness);
  out.add("Coarseness", coarseness);
  out.add("Complexity", complexity);
  out.add("Contrast", contrast);
  out.add("Strength", strength);
  return out;
}

}  // namespace ipmn
