#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ipmn/clinical.hpp"
#include "ipmn/error.hpp"

using namespace ipmn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ipmn_clinical_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<ClinicalRecord> random_records(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<ClinicalRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ClinicalRecord r;
    r.case_id = "c" + std::to_string(i);
    r.label = static_cast<int>(i % 3);
    r.values[0] = rng() % 2;
    r.values[1] = 60.0 + 10.0 * r.label + std::normal_distribution<double>(0, 4)(rng);
    r.values[2] = 120.0 + std::normal_distribution<double>(0, 5)(rng);
    r.values[3] = r.values[1] / r.values[2];
    r.values[4] = 40 + rng() % 40;
    r.values[5] = rng() % 2;
    r.values[6] = std::normal_distribution<double>(25, 3)(rng);
    r.values[7] = rng() % 2;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(MaskCovariates, VolumeAndDiagonal) {
  Geometry g;
  g.dims = {10, 10, 10};
  EXPECT_DOUBLE_EQ(mask_volume_ml(Mask::filled(g, 1)), 1.0);
  Geometry big;
  big.dims = {1, 1, 1};
  big.spacing = {2, 2, 2};
  EXPECT_DOUBLE_EQ(mask_volume_ml(Mask::filled(big, 1)), 0.008);

  Geometry one;
  one.dims = {3, 3, 3};
  std::vector<std::uint8_t> m(27, 0);
  m[13] = 1;
  EXPECT_DOUBLE_EQ(mask_diagonal_mm(Mask(one, m)), std::sqrt(3.0));

  Geometry line;
  line.dims = {12, 3, 3};
  std::vector<std::uint8_t> l(line.voxel_count(), 0);
  for (int x = 1; x < 11; ++x) l[line.index(x, 1, 1)] = 1;
  EXPECT_DOUBLE_EQ(mask_diagonal_mm(Mask(line, l)), std::sqrt(102.0));
}

TEST(MaskCovariates, MatchNaiveComputation) {
  std::mt19937 rng(4);
  Geometry g;
  g.dims = {9, 7, 5};
  g.spacing = {0.7, 1.2, 2.5};
  std::vector<std::uint8_t> m(g.voxel_count());
  int lo[3] = {99, 99, 99}, hi[3] = {-1, -1, -1};
  double count = 0;
  for (int z = 0; z < 5; ++z)
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 9; ++x) {
        const bool on = rng() % 7 == 0;
        m[g.index(x, y, z)] = on;
        if (!on) continue;
        count += 1;
        const int p[3] = {x, y, z};
        for (int a = 0; a < 3; ++a) lo[a] = std::min(lo[a], p[a]), hi[a] = std::max(hi[a], p[a]);
      }
  const Mask mask(g, m);
  EXPECT_NEAR(mask_volume_ml(mask), count * 0.7 * 1.2 * 2.5 / 1000.0, 1e-15);
  double d2 = 0;
  for (int a = 0; a < 3; ++a) d2 += std::pow((hi[a] - lo[a] + 1) * g.spacing[a], 2);
  EXPECT_NEAR(mask_diagonal_mm(mask), std::sqrt(d2), 1e-12);

  ClinicalRecord r;
  set_mask_covariates(r, mask);
  EXPECT_EQ(r.vol_over_diag(), r.volume_ml() / r.diagonal_mm());
}

TEST(ClinicalCsv, RoundTripAndMissingCells) {
  const fs::path dir = temp_dir("csv");
  auto recs = random_records(9, 1);
  recs[4].values[6] = std::nan("");
  write_clinical_csv(recs, dir / "c.csv");
  const auto back = read_clinical_csv(dir / "c.csv");
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].case_id, recs[i].case_id);
    EXPECT_EQ(back[i].label, recs[i].label);
    for (std::size_t c = 0; c < kClinicalColumns.size(); ++c) {
      if (std::isnan(recs[i].values[c])) {
        EXPECT_TRUE(std::isnan(back[i].values[c]));
      } else {
        EXPECT_EQ(back[i].values[c], recs[i].values[c]);
      }
    }
    EXPECT_EQ(back[i].vol_over_diag(), back[i].volume_ml() / back[i].diagonal_mm());
  }
  EXPECT_THROW(require_complete(back), DataError);

  auto imputed = back;
  const std::vector<std::size_t> ref{0, 1, 2, 3, 5, 6};
  impute_mean(imputed, ref);
  double mean = 0;
  for (std::size_t i : ref) mean += back[i].values[6];
  EXPECT_NEAR(imputed[4].values[6], mean / ref.size(), 1e-12);
  EXPECT_NO_THROW(require_complete(imputed));
}

TEST(ClinicalCsv, MalformedInput) {
  const fs::path dir = temp_dir("bad");
  EXPECT_THROW(read_clinical_csv(dir / "missing.csv"), IoError);
  std::ofstream(dir / "bad.csv") << "case_id,diabetes\nc0,1\n";
  EXPECT_THROW(read_clinical_csv(dir / "bad.csv"), FormatError);
}

TEST(ClinicalScreening, SelectsTheVolumeSignal) {
  const auto recs = random_records(150, 2);
  const ClinicalScreening s = screen_clinical(recs);
  ASSERT_FALSE(s.stepwise.selected.empty());
  EXPECT_EQ(s.stepwise.selected.front(), 1u);
  EXPECT_LT(s.healthy_vs_high[1].p, 1e-6);
  EXPECT_EQ(s.training_case_ids.size(), 150u);
  const std::string json = to_json(s);
  EXPECT_NE(json.find("volume_ml"), std::string::npos);
}

TEST(ClinicalTable, ColumnNames) {
  const auto recs = random_records(4, 3);
  const std::vector<std::size_t> cov{1, 3};
  const FeatureTable t = clinical_feature_table(recs, cov);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"clinical_volume_ml", "clinical_vol_over_diag"}));
  EXPECT_EQ(t.rows[2][1], recs[2].values[3]);
}

TEST(ClinicalScreening, TooFewCasesForTheFullModel) {
  const auto recs = random_records(7, 5);
  const ClinicalScreening s = screen_clinical(recs);
  EXPECT_TRUE(s.full_fit.coefficients.empty());
  EXPECT_EQ(s.training_case_ids.size(), 7u);
}
