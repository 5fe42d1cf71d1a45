#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ipmn/error.hpp"
#include "ipmn/gbt.hpp"

using namespace ipmn;

namespace {

struct Data {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

Data noisy_data(std::size_t n, unsigned seed, std::size_t features = 4) {
  std::mt19937 rng(seed);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 3);
    std::vector<double> r(features);
    for (std::size_t f = 0; f < features; ++f) r[f] = std::normal_distribution<double>(f < 2 ? 0.8 * y : 0.0, 1.0)(rng);
    d.rows.push_back(r);
    d.labels.push_back(y);
  }
  return d;
}

int argmax(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

TEST(Gbt, DefaultsAreThePublishedConfiguration) {
  const GbtParams p;
  EXPECT_EQ(p.n_estimators, 140);
  EXPECT_EQ(p.max_depth, 4);
}

TEST(Gbt, RootOnlyTreesPredictPriors) {
  Data d;
  for (int i = 0; i < 10; ++i) {
    d.rows.push_back({static_cast<double>(i)});
    d.labels.push_back(i < 2 ? 0 : (i < 5 ? 1 : 2));
  }
  GbtParams p;
  p.n_estimators = 1;
  p.max_depth = 0;
  const GbtModel m = gbt_fit(d.rows, d.labels, p);
  for (double x : {-100.0, 3.0, 55.0}) {
    const std::vector<double> prob = gbt_predict_proba(m, std::vector<double>{x});
    // One Newton step at the prior is exactly zero, so only the prior remains.
    EXPECT_NEAR(prob[0], 0.2, 1e-12);
    EXPECT_NEAR(prob[1], 0.3, 1e-12);
    EXPECT_NEAR(prob[2], 0.5, 1e-12);
  }
  Data balanced;
  for (int i = 0; i < 6; ++i) {
    balanced.rows.push_back({static_cast<double>(i)});
    balanced.labels.push_back(i % 3);
  }
  const GbtModel b = gbt_fit(balanced.rows, balanced.labels, p);
  for (double v : gbt_predict_proba(b, std::vector<double>{1.0})) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Gbt, SeparablePointsAreLearned) {
  Data d;
  std::mt19937 rng(1);
  for (int i = 0; i < 40; ++i) {
    const int y = i % 3;
    const double x0 = y + std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const double x1 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    d.rows.push_back({x0, x1});
    d.labels.push_back(y);
  }
  GbtParams p;
  p.n_estimators = 30;
  p.max_depth = 3;
  const GbtModel m = gbt_fit(d.rows, d.labels, p);
  int correct = 0;
  for (std::size_t i = 0; i < d.rows.size(); ++i) correct += argmax(gbt_predict_proba(m, d.rows[i])) == d.labels[i];
  EXPECT_EQ(correct, 40);
}

TEST(Gbt, ProbabilitiesSumToOneAndLossDecreases) {
  const Data d = noisy_data(90, 2);
  GbtParams p;
  p.n_estimators = 40;
  const GbtModel m = gbt_fit(d.rows, d.labels, p);
  ASSERT_EQ(m.training_loss.size(), 41u);
  for (std::size_t r = 1; r < m.training_loss.size(); ++r)
    EXPECT_LE(m.training_loss[r], m.training_loss[r - 1] + 1e-12);
  std::mt19937 rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x(4);
    for (double& v : x) v = std::normal_distribution<double>(0, 5)(rng);
    const auto prob = gbt_predict_proba(m, x);
    double s = 0;
    for (double v : prob) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  for (const auto& t : m.trees) EXPECT_LE(t.depth(), p.max_depth);
}

TEST(Gbt, RowOrderDoesNotMatter) {
  const Data d = noisy_data(60, 4);
  GbtParams p;
  p.n_estimators = 15;
  const std::string base = to_json(gbt_fit(d.rows, d.labels, p));
  std::vector<std::size_t> perm(d.rows.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(5));
  Data s;
  for (std::size_t i : perm) {
    s.rows.push_back(d.rows[i]);
    s.labels.push_back(d.labels[i]);
  }
  EXPECT_EQ(to_json(gbt_fit(s.rows, s.labels, p)), base);
  EXPECT_EQ(to_json(gbt_fit(d.rows, d.labels, p)), base);
}

TEST(Gbt, MonotoneFeatureTransformKeepsPredictions) {
  const Data d = noisy_data(60, 6);
  Data t = d;
  for (auto& r : t.rows) r[1] = std::exp(r[1]) * 3.0 + 1.0;
  GbtParams p;
  p.n_estimators = 20;
  const GbtModel a = gbt_fit(d.rows, d.labels, p);
  const GbtModel b = gbt_fit(t.rows, t.labels, p);
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto pa = gbt_predict_proba(a, d.rows[i]);
    const auto pb = gbt_predict_proba(b, t.rows[i]);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(pa[c], pb[c], 1e-12);
  }
}

TEST(Gbt, HandTracedStump) {
  // One round, lr 1, lambda 1, priors 1/3: g = p - y and h = 2/9 per row.
  // Class 0 stump splits at 0.5 with leaves (2/3)/(11/9) and -(2/3)/(13/9).
  const std::vector<std::vector<double>> rows{{0.0}, {1.0}, {2.0}};
  const std::vector<int> labels{0, 1, 2};
  GbtParams p;
  p.n_estimators = 1;
  p.max_depth = 1;
  p.learning_rate = 1.0;
  const GbtModel m = gbt_fit(rows, labels, p);
  const RegressionTree& t0 = m.trees[0];
  ASSERT_EQ(t0.nodes.size(), 3u);
  EXPECT_EQ(t0.nodes[0].feature, 0);
  EXPECT_DOUBLE_EQ(t0.nodes[0].threshold, 0.5);
  EXPECT_NEAR(t0.nodes[t0.nodes[0].left].leaf, 6.0 / 11.0, 1e-15);
  EXPECT_NEAR(t0.nodes[t0.nodes[0].right].leaf, -6.0 / 13.0, 1e-15);

  // Softmax of a hand-built model.
  GbtModel h;
  h.n_classes = 3;
  h.base_scores = {0.0, std::log(2.0), 0.0};
  h.n_features = 1;
  RegressionTree stump;
  stump.nodes = {{0, 1.0, 1, 2, 0.0}, {-1, 0, -1, -1, 1.0}, {-1, 0, -1, -1, -1.0}};
  RegressionTree zero;
  zero.nodes = {{-1, 0, -1, -1, 0.0}};
  h.trees = {stump, zero, zero};
  const auto prob = gbt_predict_proba(h, std::vector<double>{0.0});
  const double z = std::exp(1.0) + 2.0 + 1.0;
  EXPECT_NEAR(prob[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(prob[1], 2.0 / z, 1e-15);
  const auto right = gbt_predict_proba(h, std::vector<double>{1.0});
  EXPECT_NEAR(right[0], std::exp(-1.0) / (std::exp(-1.0) + 3.0), 1e-15);
}

TEST(Gbt, JsonIsDeterministicAndRoundTrips) {
  const Data d = noisy_data(45, 7);
  GbtParams p;
  p.n_estimators = 10;
  p.seed = 99;
  const GbtModel m = gbt_fit(d.rows, d.labels, p);
  const std::string js = to_json(m);
  EXPECT_EQ(js, to_json(gbt_fit(d.rows, d.labels, p)));
  const GbtModel back = gbt_from_json(js);
  EXPECT_EQ(to_json(back), js);
  for (const auto& r : d.rows) EXPECT_EQ(gbt_predict_proba(back, r), gbt_predict_proba(m, r));
  EXPECT_THROW(gbt_from_json("{\"classes\": 3}"), FormatError);
  EXPECT_THROW(gbt_from_json("not json"), FormatError);
}

TEST(Gbt, RejectsBadInput) {
  GbtParams p;
  p.n_estimators = 2;
  const std::vector<std::vector<double>> rows{{1.0}, {2.0}, {3.0}};
  EXPECT_THROW(gbt_fit(rows, std::vector<int>{1, 1, 1}, p), InvalidArgument);
  EXPECT_THROW(gbt_fit(std::vector<std::vector<double>>{{1.0}, {NAN}, {3.0}}, std::vector<int>{0, 1, 2}, p),
               InvalidArgument);
  EXPECT_THROW(gbt_fit(std::vector<std::vector<double>>{{1.0}, {2.0, 1.0}, {3.0}}, std::vector<int>{0, 1, 2}, p),
               InvalidArgument);
  const GbtModel m = gbt_fit(rows, std::vector<int>{0, 1, 2}, p);
  EXPECT_THROW(gbt_predict_proba(m, std::vector<double>{1.0, 2.0}), InvalidArgument);
}
