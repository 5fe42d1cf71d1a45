#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ipmn/error.hpp"
#include "ipmn/percentile.hpp"
#include "ipmn/phantom.hpp"
#include "ipmn/preprocess.hpp"

using namespace ipmn;

namespace {

Geometry cube(int n) {
  Geometry g;
  g.dims = {n, n, n};
  return g;
}

Volume noise(const Geometry& g, unsigned seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 rng(seed);
  std::vector<double> d(g.voxel_count());
  for (double& v : d) v = std::uniform_real_distribution<double>(lo, hi)(rng);
  return Volume(g, d);
}

// Smooth texture with ~1 mm correlation around 100.
Volume texture(int n, unsigned seed) {
  const Volume w = noise(cube(n), seed, -1.0, 1.0);
  const Volume b = gaussian_blur(w, 1.0);
  std::vector<double> d(b.data().begin(), b.data().end());
  for (double& v : d) v = 100.0 + 60.0 * v;
  return Volume(b.geometry(), d);
}

double rms(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s / v.size());
}

double cv(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / v.size()) / m;
}

}  // namespace

TEST(Blur, PreservesConstantsAndMass) {
  const Volume c = Volume::filled(cube(9), 4.25);
  const Volume b = gaussian_blur(c, 2.0);
  for (double x : b.data()) EXPECT_NEAR(x, 4.25, 1e-12);
  EXPECT_THROW(gaussian_blur(c, 0.0), InvalidArgument);
}

TEST(Bias, ConstantIsExact) {
  const Volume c = Volume::filled(cube(8), 37.0);
  EXPECT_EQ(correct_bias(c, 30.0), c);
}

TEST(Bias, RejectsNegativeInput) {
  std::vector<double> d(8, 1.0);
  d[2] = -1.0;
  EXPECT_THROW(correct_bias(Volume(cube(2), d), 5.0), InvalidArgument);
}

TEST(Bias, BiasFreeTextureNearlyUnchanged) {
  const Volume v = texture(40, 1);
  const Volume out = correct_bias(v, 8.0);  // >= 4x the texture correlation length
  std::vector<double> diff;
  for (std::size_t i = 0; i < v.size(); ++i) diff.push_back(out[i] - v[i]);
  std::vector<double> in(v.data().begin(), v.data().end());
  EXPECT_LE(rms(diff) / rms(in), 0.02);
  double mi = 0, mo = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    mi += v[i];
    mo += out[i];
    EXPECT_GE(out[i], 0.0);
  }
  EXPECT_NEAR(mo / mi, 1.0, 0.05);
}

TEST(Bias, SmoothFieldIsLargelyRemoved) {
  const int n = 40;
  const Volume ideal = texture(n, 2);
  const Geometry& g = ideal.geometry();
  std::vector<double> biased(g.voxel_count());
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double f = 1.0 + 0.3 * std::sin(M_PI * (x + 0.5 * y) / (1.5 * n) - 0.5);
        biased[g.index(x, y, z)] = ideal(x, y, z) * std::clamp(f, 0.7, 1.3);
      }
  const Volume in(g, biased);
  const Volume out = correct_bias(in, 8.0);
  std::vector<double> r_in, r_out;
  for (std::size_t i = 0; i < in.size(); ++i) {
    r_in.push_back(in[i] / ideal[i]);
    r_out.push_back(out[i] / ideal[i]);
  }
  EXPECT_LE(cv(r_out), 0.5 * cv(r_in));
}

TEST(Median, ConstantAndImpulse) {
  const Volume c = Volume::filled(cube(5), 2.0);
  EXPECT_EQ(denoise_median(c, 1), c);
  std::vector<double> d(125, 2.0);
  d[cube(5).index(2, 2, 2)] = 1000.0;
  const Volume out = denoise_median(Volume(cube(5), d), 1);
  for (double x : out.data()) EXPECT_EQ(x, 2.0);
  EXPECT_THROW(denoise_median(c, 0), InvalidArgument);
}

TEST(Median, MatchesBruteForce) {
  const Geometry g{{6, 5, 4}, {1, 1, 1}, kIdentity3, {0, 0, 0}};
  const Volume v = noise(g, 9);
  const Volume out = denoise_median(v, 1);
  for (int z = 0; z < 4; ++z)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        std::vector<double> nb;
        for (int dz = -1; dz <= 1; ++dz)
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int a = x + dx, b = y + dy, c = z + dz;
              if (a >= 0 && b >= 0 && c >= 0 && a < 6 && b < 5 && c < 4) nb.push_back(v(a, b, c));
            }
        std::sort(nb.begin(), nb.end());
        EXPECT_EQ(out(x, y, z), nb[(nb.size() - 1) / 2]);
      }
}

TEST(Nyul, IdenticalImagesGiveTheirMappedLandmarks) {
  const Volume v = noise(cube(10), 4, 5.0, 50.0);
  const std::vector<Volume> imgs{v, v};
  const auto ranks = default_nyul_ranks();
  const NyulModel m = nyul_train(imgs, {}, ranks);
  const auto p = percentiles(std::vector<double>(v.data().begin(), v.data().end()), ranks);
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    EXPECT_NEAR(m.standard_landmarks[r], 100.0 * (p[r] - p.front()) / (p.back() - p.front()), 1e-9);
  }
}

TEST(Nyul, AffineRelatedTrainingImagesAgree) {
  const Volume u = noise(cube(10), 5, 0.0, 10.0);
  std::vector<double> d(u.data().begin(), u.data().end());
  for (double& x : d) x = 2.0 * x + 5.0;
  const Volume w(u.geometry(), d);
  const auto ranks = default_nyul_ranks();
  const NyulModel both = nyul_train(std::vector<Volume>{u, w}, {}, ranks);
  const NyulModel single = nyul_train(std::vector<Volume>{u, u}, {}, ranks);
  for (std::size_t r = 0; r < ranks.size(); ++r) EXPECT_NEAR(both.standard_landmarks[r], single.standard_landmarks[r], 1e-9);
}

TEST(Nyul, RejectsDegenerateInputs) {
  const auto ranks = default_nyul_ranks();
  const Volume c = Volume::filled(cube(4), 3.0);
  const Volume v = noise(cube(4), 1);
  EXPECT_THROW(nyul_train(std::vector<Volume>{v}, {}, ranks), InvalidArgument);
  EXPECT_THROW(nyul_train(std::vector<Volume>{v, c}, {}, ranks), Error);
}

TEST(Nyul, ApplyHitsLandmarksIsMonotoneAndAffineInvariant) {
  const auto ranks = default_nyul_ranks();
  std::vector<Volume> train;
  for (unsigned s = 0; s < 4; ++s) {
    const Volume base = noise(cube(12), 20 + s, 0.0, 1.0);
    std::vector<double> d(base.data().begin(), base.data().end());
    for (double& x : d) x = (1.0 + s) * x * x + 10.0 * s;
    train.emplace_back(base.geometry(), d);
  }
  const NyulModel m = nyul_train(train, {}, ranks);
  const Volume test = noise(cube(12), 99, 3.0, 9.0);
  const Volume out = nyul_apply(test, m);
  const auto p = percentiles(std::vector<double>(out.data().begin(), out.data().end()), ranks);
  for (std::size_t r = 0; r < ranks.size(); ++r) EXPECT_NEAR(p[r], m.standard_landmarks[r], 0.5);

  std::mt19937 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t a = rng() % test.size(), b = rng() % test.size();
    if (test[a] <= test[b]) EXPECT_LE(out[a], out[b]);
  }

  std::vector<double> d(test.data().begin(), test.data().end());
  for (double& x : d) x = 3.7 * x + 12.0;
  const Volume moved = nyul_apply(Volume(test.geometry(), d), m);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(moved[i], out[i], 1e-6);
}

TEST(Nyul, IdentityWhenImageAlreadyStandard) {
  const auto ranks = default_nyul_ranks();
  const Volume v = noise(cube(10), 7, 0.0, 100.0);
  const NyulModel m = nyul_train(std::vector<Volume>{v, v}, {}, ranks);
  const Volume again = nyul_apply(nyul_apply(v, m), m);
  const Volume once = nyul_apply(v, m);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(again[i], once[i], 1e-9);
}

TEST(Nyul, JsonRoundTrip) {
  const Volume v = noise(cube(6), 8);
  const NyulModel m = nyul_train(std::vector<Volume>{v, noise(cube(6), 9)}, {}, default_nyul_ranks());
  EXPECT_EQ(nyul_from_json(to_json(m)), m);
  EXPECT_THROW(nyul_from_json("{\"ranks\": [1]}"), Error);
}

TEST(Nyul, ShrinksCrossCenterLandmarkSpread) {
  PhantomSpec spec;
  spec.dims = {32, 32, 32};
  spec.cases_per_class = {3, 3, 3};
  const auto ranks = default_nyul_ranks();
  std::vector<Volume> imgs;
  std::vector<Mask> masks;
  for (std::size_t i = 0; i < spec.total_cases(); ++i) {
    PhantomCase pc = generate_case(spec, i);
    imgs.push_back(pc.t2);
    masks.push_back(pc.mask);
  }
  const NyulModel m = nyul_train(imgs, masks, ranks);
  auto spread = [&](bool standardized) {
    std::vector<std::vector<double>> per_rank(ranks.size());
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      const Volume v = standardized ? nyul_apply(imgs[i], m, &masks[i]) : imgs[i];
      std::vector<double> in;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (masks[i][k]) in.push_back(v[k]);
      const auto p = percentiles(in, ranks);
      for (std::size_t r = 0; r < ranks.size(); ++r) per_rank[r].push_back(p[r]);
    }
    double total = 0;
    for (auto& vals : per_rank) {
      double mean = 0;
      for (double x : vals) mean += x;
      mean /= vals.size();
      double s = 0;
      for (double x : vals) s += (x - mean) * (x - mean);
      total += std::sqrt(s / vals.size());
    }
    return total / ranks.size();
  };
  EXPECT_LE(spread(true), 0.05 * spread(false));
}
