#include "ipmn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <memory>
#include <numeric>

#include "ipmn/error.hpp"
#include "ipmn/feature_table.hpp"
#include "ipmn/percentile.hpp"

namespace ipmn {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("prediction and label counts differ");
  if (a == 0) throw InvalidArgument("metrics need at least one case");
}

int argmax(const std::vector<double>& p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  check_lengths(preds.size(), labels.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

PrecisionRecall macro_precision_recall(std::span<const int> preds, std::span<const int> labels, int n_classes) {
  check_lengths(preds.size(), labels.size());
  std::vector<int> tp(n_classes, 0), predicted(n_classes, 0), actual(n_classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= n_classes || labels[i] < 0 || labels[i] >= n_classes) {
      throw InvalidArgument("class index out of range");
    }
    ++predicted[preds[i]];
    ++actual[labels[i]];
    if (preds[i] == labels[i]) ++tp[preds[i]];
  }
  PrecisionRecall r;
  r.support = actual;
  for (int c = 0; c < n_classes; ++c) {
    const double p = predicted[c] > 0 ? static_cast<double>(tp[c]) / predicted[c] : 0.0;
    const double rc = actual[c] > 0 ? static_cast<double>(tp[c]) / actual[c] : 0.0;
    r.per_class_precision.push_back(p);
    r.per_class_recall.push_back(rc);
    r.precision += p;
    r.recall += rc;
  }
  r.precision /= n_classes;
  r.recall /= n_classes;
  return r;
}

double binary_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw InvalidArgument("score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Rank sum of positives with tied groups sharing their average rank.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t q = i; q < j; ++q) {
      if (positive[order[q]]) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw InvalidArgument("AUC needs positives and negatives");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double auc_ovr_macro(std::span<const std::vector<double>> probs, std::span<const int> labels) {
  check_lengths(probs.size(), labels.size());
  const std::size_t n_classes = probs.front().size();
  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw InvalidArgument("AUC needs at least two distinct labels");
  double total = 0.0;
  int used = 0;
  std::vector<double> scores(probs.size());
  const auto flags = std::make_unique<bool[]>(probs.size());
  const std::span<const bool> positive(flags.get(), probs.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i].size() != n_classes) throw InvalidArgument("ragged probability vectors");
      scores[i] = probs[i][c];
      flags[i] = labels[i] == static_cast<int>(c);
      n_pos += flags[i];
    }
    if (n_pos == 0 || n_pos == probs.size()) continue;
    total += binary_auc(scores, positive);
    ++used;
  }
  return total / used;
}

std::vector<RocPoint> roc_points(std::span<const std::vector<double>> probs, std::span<const int> labels) {
  check_lengths(probs.size(), labels.size());
  std::vector<RocPoint> out;
  const std::size_t n_classes = probs.front().size();
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a][c] > probs[b][c]; });
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l == static_cast<int>(c);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) continue;
    out.push_back({static_cast<int>(c), std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
      const double thr = probs[order[i]][c];
      while (i < order.size() && probs[order[i]][c] == thr) {
        (labels[order[i]] == static_cast<int>(c) ? tp : fp)++;
        ++i;
      }
      out.push_back({static_cast<int>(c), thr, static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos});
    }
  }
  return out;
}

double dice(const Mask& a, const Mask& b) {
  require_same_geometry(a.geometry(), b.geometry());
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool fa = a[i] != 0, fb = b[i] != 0;
    na += fa;
    nb += fb;
    both += fa && fb;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

Mask mask_boundary(const Mask& m) {
  const Dims d = m.dims();
  std::vector<std::uint8_t> out(m.size(), 0);
  for (int z = 0; z < d[2]; ++z) {
    for (int y = 0; y < d[1]; ++y) {
      for (int x = 0; x < d[0]; ++x) {
        if (!m(x, y, z)) continue;
        bool edge = x == 0 || y == 0 || z == 0 || x == d[0] - 1 || y == d[1] - 1 || z == d[2] - 1;
        if (!edge) {
          edge = !m(x - 1, y, z) || !m(x + 1, y, z) || !m(x, y - 1, z) || !m(x, y + 1, z) || !m(x, y, z - 1) ||
                 !m(x, y, z + 1);
        }
        out[m.geometry().index(x, y, z)] = edge ? 1 : 0;
      }
    }
  }
  return Mask(m.geometry(), std::move(out));
}

namespace {

// Lower envelope of parabolas along one line: f[q] + (s * (p - q))^2.
void edt_1d(const double* f, double* out, int n, double s, std::vector<int>& v, std::vector<double>& zb) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    const double pq = s * q;
    while (k >= 0) {
      const double pv = s * v[k];
      const double inter = ((f[q] + pq * pq) - (f[v[k]] + pv * pv)) / (2.0 * (pq - pv));
      if (inter <= zb[k]) {
        --k;
      } else {
        break;
      }
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      zb[0] = -inf;
    } else {
      const double pv = s * v[k];
      const double inter = ((f[q] + pq * pq) - (f[v[k]] + pv * pv)) / (2.0 * (pq - pv));
      ++k;
      v[k] = q;
      zb[k] = inter;
    }
  }
  if (k < 0) {
    for (int p = 0; p < n; ++p) out[p] = inf;
    return;
  }
  int j = 0;
  for (int p = 0; p < n; ++p) {
    const double pp = s * p;
    while (j < k && zb[j + 1] < pp) ++j;
    const double dd = s * (p - v[j]);
    out[p] = f[v[j]] + dd * dd;
  }
}

}  // namespace

std::vector<double> distance_transform(const Mask& seeds) {
  const Dims d = seeds.dims();
  const Vec3 sp = seeds.spacing();
  std::vector<double> g(seeds.size());
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    any = any || seeds[i] != 0;
    g[i] = seeds[i] != 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (!any) throw InvalidArgument("distance transform needs at least one seed voxel");
  const int longest = std::max({d[0], d[1], d[2]});
  std::vector<double> line(longest), res(longest), zb(longest + 1);
  std::vector<int> v(longest);
  const std::size_t stride[3] = {1, static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[0]) * d[1]};
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int i2 = 0; i2 < d[a2]; ++i2) {
      for (int i1 = 0; i1 < d[a1]; ++i1) {
        const std::size_t base = i1 * stride[a1] + i2 * stride[a2];
        for (int p = 0; p < d[axis]; ++p) line[p] = g[base + p * stride[axis]];
        edt_1d(line.data(), res.data(), d[axis], sp[axis], v, zb);
        for (int p = 0; p < d[axis]; ++p) g[base + p * stride[axis]] = res[p];
      }
    }
  }
  for (double& x : g) x = std::sqrt(x);
  return g;
}

double hd95(const Mask& a, const Mask& b) {
  require_same_geometry(a.geometry(), b.geometry());
  if (foreground_count(a) == 0 || foreground_count(b) == 0) throw InvalidArgument("hd95 needs nonempty masks");
  const Mask ba = mask_boundary(a);
  const Mask bb = mask_boundary(b);
  auto directed = [](const Mask& from, const Mask& to) {
    const std::vector<double> dist = distance_transform(to);
    std::vector<double> d;
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (from[i]) d.push_back(dist[i]);
    }
    return percentile(d, 95.0);
  };
  return std::max(directed(ba, bb), directed(bb, ba));
}

EvaluationReport evaluate(std::span<const std::vector<double>> probs, std::span<const int> labels) {
  check_lengths(probs.size(), labels.size());
  EvaluationReport r;
  r.n = labels.size();
  std::vector<int> preds;
  for (const auto& p : probs) preds.push_back(argmax(p));
  r.acc = accuracy(preds, labels);
  r.pr = macro_precision_recall(preds, labels, kClassCount);
  r.auc = auc_ovr_macro(probs, labels);
  return r;
}

std::string to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["acc"] = report.acc;
  j["auc"] = report.auc;
  j["pr"] = report.pr.precision;
  j["rc"] = report.pr.recall;
  nlohmann::ordered_json per;
  for (std::size_t c = 0; c < report.pr.per_class_precision.size(); ++c) {
    const std::string name = c < kClassNames.size() ? std::string(kClassNames[c]) : std::to_string(c);
    per[name] = {{"precision", report.pr.per_class_precision[c]},
                 {"recall", report.pr.per_class_recall[c]},
                 {"support", report.pr.support[c]}};
  }
  j["per_class"] = per;
  j["n"] = report.n;
  j["auc_averaging"] = "one-vs-rest macro";
  return j.dump(1);
}

}  // namespace ipmn
