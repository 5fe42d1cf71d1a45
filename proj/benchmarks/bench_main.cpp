#include <benchmark/benchmark.h>

#include <random>

#include "ipmn/gbt.hpp"
#include "ipmn/phantom.hpp"
#include "ipmn/preprocess.hpp"
#include "ipmn/radiomics.hpp"

using namespace ipmn;

namespace {

const PhantomCase& sample_case() {
  static const PhantomCase c = [] {
    PhantomSpec spec;
    spec.cases_per_class = {1, 1, 1};
    return generate_case(spec, 2);
  }();
  return c;
}

void BM_ExtractFeatureVector(benchmark::State& state) {
  const PhantomCase& c = sample_case();
  const RoiBox box = mask_bounding_box(c.mask, 5);
  const Volume v = crop_roi(c.t2, box);
  const Mask m = crop_roi(c.mask, box);
  for (auto _ : state) benchmark::DoNotOptimize(extract_feature_vector(v, m, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ExtractFeatureVector)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Glcm(benchmark::State& state) {
  const PhantomCase& c = sample_case();
  const DiscretizedRoi d = discretize(c.t1, c.mask, 32);
  for (auto _ : state) benchmark::DoNotOptimize(glcm_features(d));
}
BENCHMARK(BM_Glcm)->Unit(benchmark::kMillisecond);

void BM_BiasCorrection(benchmark::State& state) {
  const PhantomCase& c = sample_case();
  for (auto _ : state) benchmark::DoNotOptimize(correct_bias(c.t1, 30.0));
}
BENCHMARK(BM_BiasCorrection)->Unit(benchmark::kMillisecond);

void BM_Median(benchmark::State& state) {
  const PhantomCase& c = sample_case();
  for (auto _ : state) benchmark::DoNotOptimize(denoise_median(c.t1, 1));
}
BENCHMARK(BM_Median)->Unit(benchmark::kMillisecond);

void BM_GbtFit(benchmark::State& state) {
  std::mt19937 rng(1);
  const int n = static_cast<int>(state.range(0));
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    std::vector<double> r(40);
    for (double& x : r) x = std::normal_distribution<double>(0.3 * (i % 3), 1.0)(rng);
    rows.push_back(r);
    labels.push_back(i % 3);
  }
  GbtParams p;
  for (auto _ : state) benchmark::DoNotOptimize(gbt_fit(rows, labels, p));
}
BENCHMARK(BM_GbtFit)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
