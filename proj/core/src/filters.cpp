#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ipmn/error.hpp"
#include "ipmn/preprocess.hpp"

namespace ipmn {
namespace {

// One separable pass along `axis`, in place on `data`.
void blur_axis(std::vector<double>& data, const Geometry& g, int axis, double sigma_mm) {
  const int n = g.dims[axis];
  if (n == 1) return;
  const double sigma_vox = sigma_mm / g.spacing[axis];
  const int radius = std::min(n - 1, static_cast<int>(std::ceil(3.0 * sigma_vox)));
  if (radius == 0) return;

  std::vector<double> kernel(2 * radius + 1);
  for (int t = -radius; t <= radius; ++t) {
    kernel[t + radius] = std::exp(-0.5 * (t / sigma_vox) * (t / sigma_vox));
  }
  // Normalizer per output position: sum of the in-grid taps.
  std::vector<double> norm(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int t = std::max(-radius, -i); t <= std::min(radius, n - 1 - i); ++t) s += kernel[t + radius];
    norm[i] = 1.0 / s;
  }

  std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(g.dims[0]),
                                    static_cast<std::size_t>(g.dims[0]) * static_cast<std::size_t>(g.dims[1])};
  const int u = axis == 0 ? 1 : 0;
  const int w = axis == 2 ? 1 : 2;
  std::vector<double> line(n), out(n);
  for (int b = 0; b < g.dims[w]; ++b) {
    for (int a = 0; a < g.dims[u]; ++a) {
      const std::size_t base = a * stride[u] + b * stride[w];
      for (int i = 0; i < n; ++i) line[i] = data[base + i * stride[axis]];
      for (int i = 0; i < n; ++i) {
        const int t0 = std::max(-radius, -i);
        const int t1 = std::min(radius, n - 1 - i);
        double acc = 0.0;
        for (int t = t0; t <= t1; ++t) acc += kernel[t + radius] * line[i + t];
        out[i] = acc * norm[i];
      }
      for (int i = 0; i < n; ++i) data[base + i * stride[axis]] = out[i];
    }
  }
}

}  // namespace

Volume gaussian_blur(const Volume& v, double sigma_mm) {
  if (!(sigma_mm > 0.0)) throw InvalidArgument("Gaussian sigma must be positive");
  std::vector<double> data(v.data().begin(), v.data().end());
  for (int axis = 0; axis < 3; ++axis) blur_axis(data, v.geometry(), axis, sigma_mm);
  return Volume(v.geometry(), std::move(data));
}

Volume correct_bias(const Volume& v, double sigma_mm) {
  if (!(sigma_mm > 0.0)) throw InvalidArgument("bias sigma must be positive");
  const auto data = v.data();
  if (std::any_of(data.begin(), data.end(), [](double x) { return x < 0.0; })) {
    throw InvalidArgument("bias correction requires non-negative voxels");
  }
  // A flat image has a flat field.
  if (std::all_of(data.begin(), data.end(), [&](double x) { return x == data.front(); })) return v;

  std::vector<double> log_img(data.size());
  std::transform(data.begin(), data.end(), log_img.begin(), [](double x) { return std::log1p(x); });
  const Volume log_vol(v.geometry(), log_img);
  const Volume field = gaussian_blur(log_vol, sigma_mm);
  const auto f = field.data();
  const double mean_field = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());

  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(0.0, std::expm1(log_img[i] - f[i] + mean_field));
  }
  return Volume(v.geometry(), std::move(out));
}

Volume denoise_median(const Volume& v, int radius_vox) {
  if (radius_vox < 1) throw InvalidArgument("median radius must be >= 1");
  const Dims& d = v.dims();
  const int r = radius_vox;
  std::vector<double> out(v.size());
  std::vector<double> window;
  window.reserve(static_cast<std::size_t>((2 * r + 1) * (2 * r + 1) * (2 * r + 1)));

  std::size_t n = 0;
  for (int z = 0; z < d[2]; ++z) {
    const int z0 = std::max(0, z - r), z1 = std::min(d[2] - 1, z + r);
    for (int y = 0; y < d[1]; ++y) {
      const int y0 = std::max(0, y - r), y1 = std::min(d[1] - 1, y + r);
      for (int x = 0; x < d[0]; ++x) {
        const int x0 = std::max(0, x - r), x1 = std::min(d[0] - 1, x + r);
        window.clear();
        for (int zz = z0; zz <= z1; ++zz) {
          for (int yy = y0; yy <= y1; ++yy) {
            const auto row = v.data().subspan(v.geometry().index(x0, yy, zz), static_cast<std::size_t>(x1 - x0 + 1));
            window.insert(window.end(), row.begin(), row.end());
          }
        }
        const auto mid = window.begin() + static_cast<std::ptrdiff_t>((window.size() - 1) / 2);
        std::nth_element(window.begin(), mid, window.end());
        out[n++] = *mid;
      }
    }
  }
  return Volume(v.geometry(), std::move(out));
}

}  // namespace ipmn
