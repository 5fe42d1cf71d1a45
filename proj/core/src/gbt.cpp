#include "ipmn/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>

#include "ipmn/error.hpp"

namespace ipmn {

double RegressionTree::predict(std::span<const double> x) const {
  int n = 0;
  while (!nodes[n].is_leaf()) {
    const TreeNode& node = nodes[n];
    n = x[node.feature] < node.threshold ? node.left : node.right;
  }
  return nodes[n].leaf;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

namespace {

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

struct Dataset {
  std::size_t n = 0;
  std::size_t f = 0;
  std::vector<double> x;  // row-major, canonical order
  std::vector<int> y;
  std::vector<std::vector<std::uint32_t>> sorted;  // per feature, rows by ascending value

  double at(std::size_t row, std::size_t feat) const { return x[row * f + feat]; }
};

Dataset canonicalize(std::span<const std::vector<double>> rows, std::span<const int> labels) {
  Dataset d;
  d.n = rows.size();
  d.f = rows.empty() ? 0 : rows.front().size();
  std::vector<std::size_t> order(d.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    return std::lexicographical_compare(rows[a].begin(), rows[a].end(), rows[b].begin(), rows[b].end());
  });
  d.x.reserve(d.n * d.f);
  for (std::size_t i : order) {
    d.x.insert(d.x.end(), rows[i].begin(), rows[i].end());
    d.y.push_back(labels[i]);
  }
  d.sorted.assign(d.f, std::vector<std::uint32_t>(d.n));
  for (std::size_t feat = 0; feat < d.f; ++feat) {
    auto& s = d.sorted[feat];
    std::iota(s.begin(), s.end(), 0u);
    std::stable_sort(s.begin(), s.end(), [&](std::uint32_t a, std::uint32_t b) { return d.at(a, feat) < d.at(b, feat); });
  }
  return d;
}

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Level-wise exact greedy tree growth on gradient/hessian pairs.
RegressionTree grow_tree(const Dataset& d, const std::vector<double>& g, const std::vector<double>& h,
                         const GbtParams& p) {
  RegressionTree tree;
  std::vector<int> node_of(d.n, 0);
  struct Stat {
    double G = 0.0, H = 0.0;
    int count = 0;
  };
  std::vector<Stat> stats(1);
  for (std::size_t i = 0; i < d.n; ++i) {
    stats[0].G += g[i];
    stats[0].H += h[i];
    ++stats[0].count;
  }
  tree.nodes.push_back(TreeNode{});
  auto score = [&](double G, double H) { return G * G / (H + p.lambda); };

  std::vector<int> frontier{0};
  for (int depth = 0; depth < p.max_depth && !frontier.empty(); ++depth) {
    const std::size_t n_nodes = tree.nodes.size();
    std::vector<char> active(n_nodes, 0);
    for (int nd : frontier) {
      if (stats[nd].count >= 2 * p.min_leaf) active[nd] = 1;
    }
    std::vector<SplitCandidate> best(n_nodes);

    // Per-feature scan state.
    std::vector<double> gl(n_nodes), hl(n_nodes), last(n_nodes);
    std::vector<int> nl(n_nodes);
    for (std::size_t feat = 0; feat < d.f; ++feat) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(nl.begin(), nl.end(), 0);
      for (std::uint32_t row : d.sorted[feat]) {
        const int nd = node_of[row];
        if (!active[nd]) continue;
        const double v = d.at(row, feat);
        if (nl[nd] > 0 && v > last[nd]) {
          const Stat& s = stats[nd];
          const int nr = s.count - nl[nd];
          if (nl[nd] >= p.min_leaf && nr >= p.min_leaf) {
            const double gain = score(gl[nd], hl[nd]) + score(s.G - gl[nd], s.H - hl[nd]) - score(s.G, s.H);
            if (gain > best[nd].gain) {
              double thr = last[nd] + 0.5 * (v - last[nd]);
              if (!(thr > last[nd])) thr = v;
              best[nd] = SplitCandidate{gain, static_cast<int>(feat), thr};
            }
          }
        }
        gl[nd] += g[row];
        hl[nd] += h[row];
        ++nl[nd];
        last[nd] = v;
      }
    }

    std::vector<int> next;
    std::vector<int> left_of(n_nodes, -1), right_of(n_nodes, -1);
    for (int nd : frontier) {
      if (!active[nd] || best[nd].feature < 0) continue;
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      stats.resize(tree.nodes.size());
      TreeNode& node = tree.nodes[nd];
      node.feature = best[nd].feature;
      node.threshold = best[nd].threshold;
      node.left = l;
      node.right = l + 1;
      left_of[nd] = l;
      right_of[nd] = l + 1;
      next.push_back(l);
      next.push_back(l + 1);
    }
    // Route rows in canonical order so child sums are order-stable.
    for (std::size_t i = 0; i < d.n; ++i) {
      const int nd = node_of[i];
      if (static_cast<std::size_t>(nd) >= n_nodes || left_of[nd] < 0) continue;
      const TreeNode& node = tree.nodes[nd];
      const int child = d.at(i, node.feature) < node.threshold ? node.left : node.right;
      node_of[i] = child;
      stats[child].G += g[i];
      stats[child].H += h[i];
      ++stats[child].count;
    }
    frontier = std::move(next);
  }

  for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
    TreeNode& node = tree.nodes[nd];
    if (node.is_leaf()) node.leaf = -p.learning_rate * stats[nd].G / (stats[nd].H + p.lambda);
  }
  return tree;
}

void check_params(const GbtParams& p) {
  if (p.n_estimators < 0) throw InvalidArgument("n_estimators must be >= 0");
  if (p.max_depth < 0) throw InvalidArgument("max_depth must be >= 0");
  if (!(p.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (p.min_leaf < 1) throw InvalidArgument("min_leaf must be >= 1");
  if (!(p.lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
}

}  // namespace

GbtModel gbt_fit(std::span<const std::vector<double>> rows, std::span<const int> labels, const GbtParams& params) {
  check_params(params);
  if (rows.size() != labels.size()) throw InvalidArgument("row and label counts differ");
  if (rows.empty()) throw InvalidArgument("cannot fit on an empty table");
  const std::size_t nf = rows.front().size();
  std::vector<int> class_count(kClassCount, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != nf) throw InvalidArgument("ragged feature rows");
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw InvalidArgument("features contain NaN or Inf");
    }
    if (labels[i] < 0 || labels[i] >= kClassCount) throw InvalidArgument("label out of range");
    ++class_count[labels[i]];
  }
  if (std::count_if(class_count.begin(), class_count.end(), [](int c) { return c > 0; }) < 2) {
    throw InvalidArgument("boosting needs at least two classes in the training data");
  }

  const Dataset d = canonicalize(rows, labels);
  const int k = kClassCount;
  GbtModel model;
  model.n_classes = k;
  model.learning_rate = params.learning_rate;
  model.n_features = nf;
  model.params = params;
  for (int c = 0; c < k; ++c) {
    // Absent classes get a tiny floor so scores stay finite.
    const double prior = std::max(static_cast<double>(class_count[c]), 1e-9) / static_cast<double>(d.n);
    model.base_scores.push_back(std::log(prior));
  }

  std::vector<double> scores(d.n * k);
  for (std::size_t i = 0; i < d.n; ++i) {
    for (int c = 0; c < k; ++c) scores[i * k + c] = model.base_scores[c];
  }
  std::vector<double> prob(d.n * k);
  auto refresh = [&] {
    double loss = 0.0;
    std::vector<double> z(k);
    for (std::size_t i = 0; i < d.n; ++i) {
      for (int c = 0; c < k; ++c) z[c] = scores[i * k + c];
      softmax_inplace(z);
      for (int c = 0; c < k; ++c) prob[i * k + c] = z[c];
      loss -= std::log(std::max(z[d.y[i]], std::numeric_limits<double>::min()));
    }
    model.training_loss.push_back(loss / static_cast<double>(d.n));
  };
  refresh();

  std::vector<double> g(d.n), h(d.n);
  for (int round = 0; round < params.n_estimators; ++round) {
    std::vector<RegressionTree> round_trees;
    for (int c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < d.n; ++i) {
        const double pc = prob[i * k + c];
        g[i] = pc - (d.y[i] == c ? 1.0 : 0.0);
        h[i] = std::max(pc * (1.0 - pc), 1e-16);
      }
      round_trees.push_back(grow_tree(d, g, h, params));
    }
    for (std::size_t i = 0; i < d.n; ++i) {
      const std::span<const double> row(d.x.data() + i * d.f, d.f);
      for (int c = 0; c < k; ++c) scores[i * k + c] += round_trees[c].predict(row);
    }
    for (auto& t : round_trees) model.trees.push_back(std::move(t));
    refresh();
  }
  return model;
}

GbtModel gbt_fit(const FeatureTable& table, const GbtParams& params) {
  table.validate();
  GbtModel m = gbt_fit(table.rows, table.labels, params);
  m.feature_names = table.columns;
  m.training_case_ids = table.case_ids;
  std::sort(m.training_case_ids.begin(), m.training_case_ids.end());
  return m;
}

std::vector<double> gbt_raw_scores(const GbtModel& model, std::span<const double> x) {
  if (x.size() != model.n_features) throw InvalidArgument("feature arity differs from the training data");
  std::vector<double> z = model.base_scores;
  for (std::size_t t = 0; t < model.trees.size(); ++t) z[t % model.n_classes] += model.trees[t].predict(x);
  return z;
}

std::vector<double> gbt_predict_proba(const GbtModel& model, std::span<const double> x) {
  auto z = gbt_raw_scores(model, x);
  softmax_inplace(z);
  return z;
}

std::vector<std::vector<double>> gbt_predict_proba(const GbtModel& model, const FeatureTable& table) {
  std::vector<std::vector<double>> out;
  out.reserve(table.n_rows());
  for (const auto& row : table.rows) out.push_back(gbt_predict_proba(model, row));
  return out;
}

double multiclass_log_loss(std::span<const std::vector<double>> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size() || labels.empty()) throw InvalidArgument("log-loss length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    loss -= std::log(std::max(probabilities[i].at(labels[i]), std::numeric_limits<double>::min()));
  }
  return loss / static_cast<double>(labels.size());
}

std::string to_json(const GbtModel& model) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json classes = ordered_json::array();
  for (auto n : kClassNames) classes.push_back(n);
  j["classes"] = classes;
  j["learning_rate"] = model.learning_rate;
  j["base_scores"] = model.base_scores;
  ordered_json trees = ordered_json::array();
  for (const auto& t : model.trees) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : t.nodes) {
      ordered_json node;
      if (n.is_leaf()) {
        node["leaf"] = n.leaf;
      } else {
        node["split"] = {{"f", n.feature}, {"thr", n.threshold}};
        node["l"] = n.left;
        node["r"] = n.right;
      }
      nodes.push_back(node);
    }
    trees.push_back(nodes);
  }
  j["trees"] = trees;
  ordered_json meta;
  meta["n_estimators"] = model.params.n_estimators;
  meta["max_depth"] = model.params.max_depth;
  meta["min_leaf"] = model.params.min_leaf;
  meta["lambda"] = model.params.lambda;
  meta["seed"] = model.params.seed;
  meta["n_features"] = model.n_features;
  meta["feature_names"] = model.feature_names;
  meta["training_case_ids"] = model.training_case_ids;
  meta["training_loss"] = model.training_loss;
  j["meta"] = meta;
  return j.dump(1);
}

GbtModel gbt_from_json(std::string_view text) {
  GbtModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.n_classes = static_cast<int>(j.at("classes").size());
    m.learning_rate = j.at("learning_rate").get<double>();
    m.base_scores = j.at("base_scores").get<std::vector<double>>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      for (const auto& n : t) {
        TreeNode node;
        if (n.contains("leaf")) {
          node.leaf = n.at("leaf").get<double>();
        } else {
          node.feature = n.at("split").at("f").get<int>();
          node.threshold = n.at("split").at("thr").get<double>();
          node.left = n.at("l").get<int>();
          node.right = n.at("r").get<int>();
        }
        tree.nodes.push_back(node);
      }
      m.trees.push_back(std::move(tree));
    }
    const auto& meta = j.at("meta");
    m.params.n_estimators = meta.at("n_estimators").get<int>();
    m.params.max_depth = meta.at("max_depth").get<int>();
    m.params.min_leaf = meta.at("min_leaf").get<int>();
    m.params.lambda = meta.at("lambda").get<double>();
    m.params.seed = meta.at("seed").get<std::uint64_t>();
    m.params.learning_rate = m.learning_rate;
    m.n_features = meta.at("n_features").get<std::size_t>();
    m.feature_names = meta.at("feature_names").get<std::vector<std::string>>();
    m.training_case_ids = meta.at("training_case_ids").get<std::vector<std::string>>();
    m.training_loss = meta.at("training_loss").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid model JSON: ") + e.what());
  }
  if (static_cast<int>(m.base_scores.size()) != m.n_classes || m.trees.size() % m.n_classes != 0) {
    throw FormatError("model JSON has inconsistent class layout");
  }
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes) {
      if (!n.is_leaf() && (n.feature >= static_cast<int>(m.n_features) || n.left <= 0 || n.right <= 0 ||
                           n.left >= static_cast<int>(t.nodes.size()) || n.right >= static_cast<int>(t.nodes.size()))) {
        throw FormatError("model JSON contains an invalid split node");
      }
    }
  }
  return m;
}

}  // namespace ipmn
