#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ipmn/error.hpp"
#include "ipmn/volume.hpp"

using namespace ipmn;

namespace {

Geometry grid(Dims d, Vec3 sp = {1, 1, 1}) {
  Geometry g;
  g.dims = d;
  g.spacing = sp;
  return g;
}

Volume ramp(Dims d, Vec3 sp = {1, 1, 1}) {
  const Geometry g = grid(d, sp);
  std::vector<double> v(g.voxel_count());
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) v[g.index(x, y, z)] = x + 10.0 * y + 100.0 * z;
  return Volume(g, v);
}

Mask single_voxel(Dims d, Index3 p) {
  const Geometry g = grid(d);
  std::vector<std::uint8_t> m(g.voxel_count(), 0);
  m[g.index(p[0], p[1], p[2])] = 1;
  return Mask(g, m);
}

}  // namespace

TEST(Volume, RejectsBadConstruction) {
  EXPECT_THROW(Volume(grid({2, 2, 2}), std::vector<double>(7)), InvalidArgument);
  EXPECT_THROW(Volume(grid({2, 2, 2}, {1, 0, 1}), std::vector<double>(8)), GeometryError);
  std::vector<double> nan(8, 0.0);
  nan[3] = std::nan("");
  EXPECT_THROW(Volume(grid({2, 2, 2}), nan), InvalidArgument);
  EXPECT_THROW(Mask(grid({1, 1, 2}), std::vector<std::uint8_t>{0, 2}), InvalidArgument);
}

TEST(Volume, ReorientIdentityForRas) {
  const Volume v = ramp({3, 4, 5});
  EXPECT_EQ(reorient_ras(v), v);
}

TEST(Volume, ReorientLpsFlipsFirstTwoAxes) {
  Geometry g = grid({3, 4, 2});
  g.direction = {{{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}}};
  g.origin = {10, 20, 0};
  const Volume base = ramp({3, 4, 2});
  const Volume lps(g, std::vector<double>(base.data().begin(), base.data().end()));
  const Volume ras = reorient_ras(lps);
  EXPECT_EQ(ras.geometry().direction, kIdentity3);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 3; ++x) EXPECT_EQ(ras(x, y, z), lps(2 - x, 3 - y, z));
  // World position of each voxel is preserved.
  const Vec3 w_in = lps.geometry().world(2, 3, 1);
  const Vec3 w_out = ras.geometry().world(0, 0, 1);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(w_in[a], w_out[a], 1e-12);
  EXPECT_EQ(reorient_ras(ras), ras);
}

TEST(Volume, ReorientPermutationPreservesValueMultiset) {
  std::mt19937 rng(5);
  const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (const auto& p : perms) {
    Geometry g = grid({3, 4, 5});
    g.direction = {};
    for (int c = 0; c < 3; ++c) g.direction[p[c]][c] = (rng() % 2) ? 1.0 : -1.0;
    std::vector<double> data(g.voxel_count());
    for (double& d : data) d = std::uniform_real_distribution<double>(0, 1)(rng);
    const Volume v(g, data);
    const Volume r = reorient_ras(v);
    EXPECT_EQ(r.geometry().direction, kIdentity3);
    std::vector<double> a(v.data().begin(), v.data().end()), b(r.data().begin(), r.data().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_EQ(reorient_ras(r), r);
  }
}

TEST(Volume, ReorientRejectsOblique) {
  Geometry g = grid({2, 2, 2});
  const double s = std::sqrt(0.5);
  g.direction = {{{s, -s, 0}, {s, s, 0}, {0, 0, 1}}};
  EXPECT_THROW(reorient_ras(Volume(g, std::vector<double>(8, 1.0))), GeometryError);
}

TEST(Volume, ResampleConstantIsExact) {
  const Volume v = Volume::filled(grid({5, 6, 7}, {0.7, 1.3, 2.1}), 5.0);
  for (double t : {0.5, 1.0, 1.7}) {
    const Volume r = resample_isotropic(v, t);
    for (double x : r.data()) EXPECT_EQ(x, 5.0);
    EXPECT_EQ(r.spacing(), (Vec3{t, t, t}));
  }
}

TEST(Volume, ResampleIdentity) {
  const Volume v = ramp({4, 5, 6});
  EXPECT_EQ(resample_isotropic(v, 1.0).data().size(), v.size());
  const Volume r = resample_isotropic(v, 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(r[i], v[i]);
}

TEST(Volume, ResampleRampHalvesIncrement) {
  // 2 mm spacing along x, value = x index (i.e. 0.5 per mm).
  const Geometry g = grid({8, 2, 2}, {2, 1, 1});
  std::vector<double> d(g.voxel_count());
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 8; ++x) d[g.index(x, y, z)] = x;
  const Volume r = resample_isotropic(Volume(g, d), 1.0);
  EXPECT_EQ(r.dims()[0], 16);
  for (int x = 0; x < 15; ++x) EXPECT_NEAR(r(x, 1, 1), 0.5 * x, 1e-6);
}

TEST(Volume, ResampleNearestKeepsMaskBinary) {
  const Mask m = single_voxel({4, 4, 4}, {1, 2, 3});
  const Mask r = resample_isotropic(m, 0.5);
  EXPECT_EQ(r.dims(), (Dims{8, 8, 8}));
  EXPECT_GT(foreground_count(r), 0u);
}

TEST(Volume, BoundingBoxExamples) {
  const Mask m = single_voxel({10, 10, 10}, {3, 3, 3});
  RoiBox b = mask_bounding_box(m, 0);
  EXPECT_EQ(b.lo, (Index3{3, 3, 3}));
  EXPECT_EQ(b.hi, (Index3{4, 4, 4}));
  b = mask_bounding_box(m, 2);
  EXPECT_EQ(b.lo, (Index3{1, 1, 1}));
  EXPECT_EQ(b.hi, (Index3{6, 6, 6}));
  const RoiBox corner = mask_bounding_box(single_voxel({10, 10, 10}, {0, 0, 9}), 5);
  EXPECT_EQ(corner.lo, (Index3{0, 0, 4}));
  EXPECT_EQ(corner.hi, (Index3{6, 6, 10}));
  EXPECT_THROW(mask_bounding_box(Mask::filled(grid({2, 2, 2}), 0), 0), Error);
}

TEST(Volume, BoundingBoxMonotoneInMargin) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Geometry g = grid({9, 8, 7});
    std::vector<std::uint8_t> m(g.voxel_count(), 0);
    for (int k = 0; k < 4; ++k) m[rng() % m.size()] = 1;
    const Mask mask(g, m);
    RoiBox prev = mask_bounding_box(mask, 0);
    for (int z = 0; z < 7; ++z)
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 9; ++x)
          if (mask(x, y, z)) {
            EXPECT_GE(x, prev.lo[0]);
            EXPECT_LT(x, prev.hi[0]);
            EXPECT_GE(z, prev.lo[2]);
            EXPECT_LT(z, prev.hi[2]);
          }
    for (int margin = 1; margin < 4; ++margin) {
      const RoiBox b = mask_bounding_box(mask, margin);
      for (int a = 0; a < 3; ++a) {
        EXPECT_LE(b.lo[a], prev.lo[a]);
        EXPECT_GE(b.hi[a], prev.hi[a]);
      }
      prev = b;
    }
  }
}

TEST(Volume, CropRoi) {
  const Volume v = ramp({6, 5, 4}, {1, 2, 3});
  RoiBox full{{0, 0, 0}, {6, 5, 4}, 0};
  EXPECT_EQ(crop_roi(v, full), v);
  const RoiBox box{{1, 2, 1}, {4, 5, 3}, 0};
  const Volume c = crop_roi(v, box);
  EXPECT_EQ(c.dims(), (Dims{3, 3, 2}));
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 3; ++x) EXPECT_EQ(c(x, y, z), v(x + 1, y + 2, z + 1));
  EXPECT_EQ(c.geometry().origin, (Vec3{1, 4, 3}));
  EXPECT_EQ(crop_roi(c, RoiBox{{0, 0, 0}, c.dims(), 0}), c);
  EXPECT_THROW(crop_roi(v, RoiBox{{0, 0, 0}, {7, 5, 4}, 0}), Error);
}
