#include <algorithm>
#include <cmath>
#include <vector>

#include "ipmn/radiomics.hpp"
#include "size_matrix.hpp"

namespace ipmn {

namespace detail {

SizeMatrixStats size_matrix_stats(const GrayMatrix& m) {
  SizeMatrixStats s;
  s.total = m.sum();
  if (s.total == 0.0) return s;
  const double n = s.total;

  std::vector<double> row_sum(m.rows, 0.0), col_sum(m.cols, 0.0);
  double mu_i = 0.0, mu_j = 0.0;
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const double v = m(r, c);
      row_sum[r] += v;
      col_sum[c] += v;
      mu_i += (r + 1) * v / n;
      mu_j += (c + 1) * v / n;
    }
  }
  for (int r = 0; r < m.rows; ++r) {
    const double i = r + 1, i2 = i * i;
    for (int c = 0; c < m.cols; ++c) {
      const double v = m(r, c);
      if (v == 0.0) continue;
      const double p = v / n;
      const double j = c + 1, j2 = j * j;
      s.small_emphasis += p / j2;
      s.large_emphasis += p * j2;
      s.gray_variance += p * (i - mu_i) * (i - mu_i);
      s.size_variance += p * (j - mu_j) * (j - mu_j);
      s.entropy -= p * std::log2(p);
      s.low_gray += p / i2;
      s.high_gray += p * i2;
      s.small_low += p / (i2 * j2);
      s.small_high += p * i2 / j2;
      s.large_low += p * j2 / i2;
      s.large_high += p * i2 * j2;
    }
  }
  for (double v : row_sum) s.gray_nonuniformity += v * v;
  for (double v : col_sum) s.size_nonuniformity += v * v;
  s.gray_nonuniformity_n = s.gray_nonuniformity / (n * n);
  s.gray_nonuniformity /= n;
  s.size_nonuniformity_n = s.size_nonuniformity / (n * n);
  s.size_nonuniformity /= n;
  return s;
}

}  // namespace detail

GrayMatrix glrlm_matrix(const DiscretizedRoi& d, const Index3& dir) {
  // Longest possible run along dir is bounded by the largest grid extent.
  const int max_len = *std::max_element(d.dims.begin(), d.dims.end());
  GrayMatrix m(d.ng, max_len);
  int longest = 0;
  for (int z = 0; z < d.dims[2]; ++z) {
    for (int y = 0; y < d.dims[1]; ++y) {
      for (int x = 0; x < d.dims[0]; ++x) {
        const int level = d.at(x, y, z);
        if (level == 0) continue;
        // Only start counting at the first voxel of a run.
        if (d.level_or_zero(x - dir[0], y - dir[1], z - dir[2]) == level) continue;
        int len = 1;
        while (d.level_or_zero(x + len * dir[0], y + len * dir[1], z + len * dir[2]) == level) ++len;
        m(level - 1, len - 1) += 1.0;
        longest = std::max(longest, len);
      }
    }
  }
  GrayMatrix trimmed(d.ng, std::max(longest, 1));
  for (int r = 0; r < d.ng; ++r) {
    for (int c = 0; c < trimmed.cols; ++c) trimmed(r, c) = m(r, c);
  }
  return trimmed;
}

NamedValues glrlm_features(const DiscretizedRoi& d) {
  const auto names = glrlm_feature_names();
  const double voxels = static_cast<double>(d.foreground_count());
  std::vector<double> acc(names.size(), 0.0);
  int used = 0;
  for (const auto& dir : kDirections13) {
    const auto s = detail::size_matrix_stats(glrlm_matrix(d, dir));
    if (s.total == 0.0) continue;
    const double f[] = {s.gray_nonuniformity, s.gray_nonuniformity_n, s.gray_variance, s.high_gray,
                        s.large_emphasis,     s.large_high,           s.large_low,     s.low_gray,
                        s.entropy,            s.size_nonuniformity,   s.size_nonuniformity_n,
                        s.total / voxels,  // RunPercentage
                        s.size_variance,      s.small_emphasis,       s.small_high,    s.small_low};
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f[k];
    ++used;
  }
  NamedValues out;
  for (std::size_t k = 0; k < names.size(); ++k) out.add(std::string(names[k]), used ? acc[k] / used : 0.0);
  return out;
}

}  // namespace ipmn
