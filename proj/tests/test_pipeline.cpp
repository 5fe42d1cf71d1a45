#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ipmn/error.hpp"
#include "ipmn/phantom.hpp"
#include "ipmn/pipeline.hpp"

using namespace ipmn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One small study shared by the tests of this file.
const fs::path& study_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("ipmn_pipeline_study_" + std::to_string(::getpid()));
    fs::remove_all(d);
    PhantomSpec spec;
    spec.cases_per_class = {8, 8, 8};
    spec.dims = {32, 32, 32};
    const StudyIndex idx = generate_study(spec, d, 2);
    write_dl_probabilities(synthetic_dl_probabilities(idx, 3), d / "dl.csv");
    return d;
  }();
  return dir;
}

PipelineConfig small_config(const std::string& out) {
  PipelineConfig c;
  c.study_dir = study_dir();
  c.out_dir = fs::temp_directory_path() / ("ipmn_pipeline_" + out);
  fs::remove_all(c.out_dir);
  c.seed = 11;
  c.jobs = 2;
  c.cv_folds = 3;
  c.test_fraction = 0.25;
  c.preprocess.bias_sigma_mm = 10.0;
  c.grid_n_estimators = {10, 20};
  c.grid_max_depth = {2};
  c.ablation = false;
  return c;
}

}  // namespace

TEST(Pipeline, RadiomicsOnlyRunReportsSkippedFusion) {
  const PipelineConfig c = small_config("plain");
  const PipelineResult r = run_pipeline(c);
  EXPECT_EQ(r.test_ids.size(), 6u);
  EXPECT_EQ(r.train_ids.size(), 18u);
  EXPECT_FALSE(r.fused.has_value());
  const std::string report = slurp(c.out_dir / "report.json");
  EXPECT_NE(report.find("fusion skipped"), std::string::npos);
  for (const char* f : {"split.json", "nyul_t1.json", "nyul_t2.json", "features.csv", "scaler.json", "model.json",
                        "grid_search.json", "predictions.csv", "roc_points.csv", "summary.txt"})
    EXPECT_TRUE(fs::exists(c.out_dir / f)) << f;
  for (const std::string& id : r.test_ids)
    for (const char* f : {"nyul_t1.json", "scaler.json", "model.json"})
      EXPECT_EQ(slurp(c.out_dir / f).find("\"" + id + "\""), std::string::npos) << id << " in " << f;
}

TEST(Pipeline, RerunIsByteIdenticalAndFusionNeverLoses) {
  PipelineConfig a = small_config("fused_a");
  a.dl_probabilities = study_dir() / "dl.csv";
  PipelineConfig b = a;
  b.out_dir = fs::temp_directory_path() / "ipmn_pipeline_fused_b";
  fs::remove_all(b.out_dir);
  b.jobs = 1;
  const PipelineResult ra = run_pipeline(a);
  run_pipeline(b);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a.out_dir)) {
    EXPECT_EQ(slurp(e.path()), slurp(b.out_dir / e.path().filename())) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 12u);
  ASSERT_TRUE(ra.fused.has_value());
  EXPECT_TRUE(fs::exists(a.out_dir / "fusion.json"));
}

TEST(Pipeline, PollutedScalerTripsLeakageGuard) {
  PipelineConfig c = small_config("polluted");
  c.debug_pollute_scaler = true;
  EXPECT_THROW(run_pipeline(c), LeakageError);
}

TEST(Pipeline, InputErrors) {
  PipelineConfig c = small_config("errors");
  c.seed.reset();
  EXPECT_THROW(run_pipeline(c), InvalidArgument);
  c = small_config("errors");
  c.study_dir = fs::temp_directory_path() / "ipmn_no_such_study";
  EXPECT_THROW(run_pipeline(c), IoError);
}

TEST(Pipeline, LeakageCheck) {
  const TrainingLists ok{{"scaler", {"a", "b"}}, {"model", {"a", "b"}}};
  EXPECT_NO_THROW(check_leakage({"c"}, ok));
  const TrainingLists bad{{"scaler", {"a", "b"}}, {"Nyul T1 model", {"a", "c"}}};
  try {
    check_leakage({"c"}, bad);
    FAIL() << "expected LeakageError";
  } catch (const LeakageError& e) {
    EXPECT_NE(std::string(e.what()).find("Nyul T1 model"), std::string::npos);
    EXPECT_EQ(e.category(), ErrorCategory::leakage);
  }
}

TEST(PipelineConfig, ParsesNestedKeysAndRejectsUnknown) {
  const PipelineConfig c = pipeline_config_from_json(R"({
    "study_dir": "s", "out_dir": "o", "seed": 5, "jobs": 3,
    "split": {"test_fraction": 0.3, "cv_folds": 4},
    "radiomics": {"bin_count": 16},
    "gbt": {"learning_rate": 0.2, "grid_n_estimators": [5], "grid_max_depth": [1, 2]},
    "fusion": {"k_grid": [0, 1], "t_grid": [0.34, 1.01]},
    "ablation": false
  })");
  EXPECT_EQ(c.study_dir, fs::path("s"));
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.jobs, 3);
  EXPECT_EQ(c.test_fraction, 0.3);
  EXPECT_EQ(c.cv_folds, 4);
  EXPECT_EQ(c.bin_count, 16);
  EXPECT_EQ(c.gbt.learning_rate, 0.2);
  EXPECT_EQ(c.grid_max_depth, (std::vector<int>{1, 2}));
  EXPECT_FALSE(c.ablation);
  EXPECT_EQ(to_json(pipeline_config_from_json(to_json(c))), to_json(c));
  EXPECT_THROW(pipeline_config_from_json(R"({"sead": 5})"), FormatError);
  EXPECT_THROW(pipeline_config_from_json(R"({"split": {"folds": 5}})"), FormatError);
  const PipelineConfig d = pipeline_config_from_json("{}");
  EXPECT_EQ(d.test_fraction, 0.2);
  EXPECT_EQ(d.gbt.n_estimators, 140);
}
