#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ipmn/error.hpp"
#include "ipmn/fusion.hpp"

using namespace ipmn;
namespace fs = std::filesystem;

namespace {

ProbabilityVector random_simplex(std::mt19937& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  ProbabilityVector p{g(rng), g(rng), g(rng)};
  const double s = p[0] + p[1] + p[2];
  for (double& v : p) v /= s;
  return p;
}

ProbabilityVector one_hot(int c, double peak = 0.8) {
  ProbabilityVector p(3, (1.0 - peak) / 2.0);
  p[c] = peak;
  return p;
}

double l1(const ProbabilityVector& a, const ProbabilityVector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

}  // namespace

TEST(Fuse, Examples) {
  const ProbabilityVector pr{1, 0, 0}, pd{0, 0, 1};
  EXPECT_EQ(fuse(pd, pr, {0.7, 0.9}), pr);
  const ProbabilityVector out = fuse(ProbabilityVector{0.2, 0.3, 0.5}, ProbabilityVector{0.4, 0.4, 0.2}, {0.5, 0.5});
  EXPECT_NEAR(out[0], 0.3, 1e-15);
  EXPECT_NEAR(out[1], 0.35, 1e-15);
  EXPECT_NEAR(out[2], 0.35, 1e-15);
  EXPECT_EQ(argmax(out), 1);
  std::mt19937 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_simplex(rng), b = random_simplex(rng);
    EXPECT_EQ(fuse(a, b, {1.0, 1.01}), a);
    EXPECT_EQ(fuse(a, b, {0.0, 1.01}), b);
  }
}

TEST(Fuse, Errors) {
  const ProbabilityVector ok{0.2, 0.3, 0.5};
  EXPECT_THROW(fuse(ok, ProbabilityVector{0.5, 0.5, 0.5}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(fuse(ok, ProbabilityVector{-0.1, 0.6, 0.5}, {0.5, 0.5}), InvalidArgument);
  EXPECT_THROW(fuse(ok, ok, {1.5, 0.5}), InvalidArgument);
  EXPECT_THROW(fuse(ok, ok, {0.5, 0.0}), InvalidArgument);
  EXPECT_THROW(fuse(ok, ok, {0.5, 1.2}), InvalidArgument);
}

TEST(Fuse, Properties) {
  std::mt19937 rng(2);
  const auto ks = default_k_grid();
  const auto ts = default_t_grid();
  for (int i = 0; i < 300; ++i) {
    const auto pd = random_simplex(rng), pr = random_simplex(rng);
    const double low_t = std::uniform_real_distribution<double>(0.01, 1.0 / 3.0)(rng);
    EXPECT_EQ(fuse(pd, pr, {0.6, low_t}), pr);
    double prev = 1e300;
    for (double k : ks) {
      const auto out = fuse(pd, pr, {k, 1.01});
      double s = 0;
      for (double v : out) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
      const double d = l1(out, pd);
      EXPECT_LE(d, prev + 1e-15);
      prev = d;
    }
    if (argmax(pd) == argmax(pr))
      for (double k : ks)
        for (double t : ts) EXPECT_EQ(argmax(fuse(pd, pr, {k, t})), argmax(pd));
  }
}

TEST(Fuse, Grids) {
  const auto ks = default_k_grid();
  const auto ts = default_t_grid();
  ASSERT_EQ(ks.size(), 11u);
  EXPECT_EQ(ks.front(), 0.0);
  EXPECT_EQ(ks.back(), 1.0);
  ASSERT_EQ(ts.size(), 13u);
  EXPECT_NEAR(ts.front(), 0.34, 1e-12);
  EXPECT_NEAR(ts[11], 1.0, 1e-12);
  EXPECT_EQ(ts.back(), 1.01);
}

TEST(FusionGrid, ConstructedDominance) {
  std::vector<FusionCase> dl_right, rad_right;
  for (int i = 0; i < 30; ++i) {
    const int y = i % 3;
    dl_right.push_back({one_hot(y), one_hot((y + 1) % 3, 0.6), y});
    rad_right.push_back({one_hot((y + 2) % 3), one_hot(y, 0.6), y});
  }
  const auto ks = default_k_grid();
  const auto ts = default_t_grid();
  const FusionGridResult a = fusion_grid_search(dl_right, ks, ts);
  EXPECT_EQ(a.best_accuracy, 1.0);
  EXPECT_EQ(fused_accuracy(dl_right, a.best), 1.0);
  const FusionGridResult b = fusion_grid_search(rad_right, ks, ts);
  EXPECT_EQ(b.best_accuracy, 1.0);
  // Smallest t wins the tie: the always-gate point.
  EXPECT_NEAR(b.best.t, 0.34, 1e-12);
  EXPECT_EQ(b.best.k, 0.0);
  EXPECT_THROW(fusion_grid_search(std::vector<FusionCase>{}, ks, ts), InvalidArgument);
}

TEST(FusionGrid, BeatsBothPureStrategies) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FusionCase> cases;
    for (int i = 0; i < 60; ++i) cases.push_back({random_simplex(rng), random_simplex(rng), static_cast<int>(rng() % 3)});
    const auto ks = default_k_grid();
    const auto ts = default_t_grid();
    const FusionGridResult r = fusion_grid_search(cases, ks, ts);
    EXPECT_GE(r.best_accuracy, fused_accuracy(cases, {1.0, 1.01}));
    EXPECT_GE(r.best_accuracy, fused_accuracy(cases, {0.0, 1.01}));
    double best = 0;
    for (std::size_t ti = 0; ti < ts.size(); ++ti)
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const double acc = fused_accuracy(cases, {ks[ki], ts[ti]});
        EXPECT_EQ(r.accuracy[ti][ki], acc);
        best = std::max(best, acc);
      }
    EXPECT_EQ(r.best_accuracy, best);
  }
}

TEST(DlProbabilities, CsvValidation) {
  const fs::path dir = fs::temp_directory_path() / "ipmn_fusion_csv";
  fs::remove_all(dir);
  fs::create_directories(dir);
  DlProbabilities dl;
  dl.case_ids = {"a", "b"};
  dl.probs = {{0.2, 0.3, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
  write_dl_probabilities(dl, dir / "ok.csv");
  const DlProbabilities back = read_dl_probabilities(dir / "ok.csv");
  EXPECT_EQ(back.case_ids, dl.case_ids);
  EXPECT_EQ(back.at("b"), dl.probs[1]);
  EXPECT_THROW(back.at("zzz"), DataError);

  std::ofstream(dir / "sum.csv") << "case_id,p_healthy,p_low,p_high\na,0.2,0.3,0.5\nbad_case,0.5,0.5,0.1\n";
  try {
    read_dl_probabilities(dir / "sum.csv");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad_case"), std::string::npos);
  }
  std::ofstream(dir / "hdr.csv") << "id,a,b,c\nx,1,0,0\n";
  EXPECT_THROW(read_dl_probabilities(dir / "hdr.csv"), Error);
  std::ofstream(dir / "dup.csv") << "case_id,p_healthy,p_low,p_high\na,1,0,0\na,0,1,0\n";
  EXPECT_THROW(read_dl_probabilities(dir / "dup.csv"), DataError);
}
