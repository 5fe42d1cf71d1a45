#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <string>

#include "ipmn/error.hpp"
#include "ipmn/percentile.hpp"
#include "ipmn/preprocess.hpp"

namespace ipmn {
namespace {

std::vector<double> sample_values(const Volume& v, const Mask* mask) {
  if (!mask) return {v.data().begin(), v.data().end()};
  require_same_geometry(v.geometry(), mask->geometry());
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if ((*mask)[i]) out.push_back(v[i]);
  }
  if (out.empty()) throw InvalidArgument("standardization mask has no foreground voxels");
  return out;
}

void check_ranks(std::span<const double> ranks) {
  if (ranks.size() < 3) throw InvalidArgument("Nyul needs at least 3 landmark ranks");
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (!(ranks[i] > 0.0 && ranks[i] < 100.0)) throw InvalidArgument("Nyul ranks must lie in (0, 100)");
    if (i > 0 && !(ranks[i] > ranks[i - 1])) throw InvalidArgument("Nyul ranks must be strictly increasing");
  }
}

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(b > a); }) == v.end();
}

}  // namespace

std::vector<double> default_nyul_ranks() { return {1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 99}; }

void validate(const NyulModel& model) {
  check_ranks(model.ranks);
  if (model.standard_landmarks.size() != model.ranks.size()) {
    throw InvalidArgument("Nyul landmark count differs from rank count");
  }
  if (!strictly_increasing(model.standard_landmarks)) {
    throw InvalidArgument("Nyul standard landmarks must be strictly increasing");
  }
  if (!(model.scale_bounds[1] > model.scale_bounds[0])) throw InvalidArgument("Nyul scale bounds inverted");
}

NyulModel nyul_train(std::span<const Volume> images, std::span<const Mask> masks, std::span<const double> ranks,
                     std::array<double, 2> scale_bounds) {
  if (images.size() < 2) throw InvalidArgument("Nyul training needs at least 2 images");
  if (!masks.empty() && masks.size() != images.size()) {
    throw InvalidArgument("Nyul training masks must pair one-to-one with images");
  }
  check_ranks(ranks);
  if (!(scale_bounds[1] > scale_bounds[0])) throw InvalidArgument("Nyul scale bounds inverted");

  const double span = scale_bounds[1] - scale_bounds[0];
  std::vector<double> sum(ranks.size(), 0.0);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto values = sample_values(images[k], masks.empty() ? nullptr : &masks[k]);
    const auto p = percentiles(values, ranks);
    const double lo = p.front(), hi = p.back();
    if (!(hi > lo)) {
      throw NumericError("degenerate training image " + std::to_string(k) + ": first and last landmarks coincide");
    }
    for (std::size_t r = 0; r < p.size(); ++r) sum[r] += scale_bounds[0] + (p[r] - lo) / (hi - lo) * span;
  }

  NyulModel model;
  model.ranks.assign(ranks.begin(), ranks.end());
  model.scale_bounds = scale_bounds;
  model.standard_landmarks.resize(ranks.size());
  for (std::size_t r = 0; r < sum.size(); ++r) {
    model.standard_landmarks[r] = sum[r] / static_cast<double>(images.size());
  }
  if (!strictly_increasing(model.standard_landmarks)) {
    throw NumericError("trained Nyul landmarks are not strictly increasing");
  }
  return model;
}

Volume nyul_apply(const Volume& v, const NyulModel& model, const Mask* mask) {
  validate(model);
  const auto values = sample_values(v, mask);
  const auto q = percentiles(values, model.ranks);
  const auto& s = model.standard_landmarks;
  const std::size_t n = q.size();
  if (!(q.back() > q.front())) throw NumericError("degenerate image: first and last landmarks coincide");

  std::vector<double> slope(n - 1, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (q[k + 1] > q[k]) slope[k] = (s[k + 1] - s[k]) / (q[k + 1] - q[k]);
  }
  // Terminal slopes come from the outermost non-degenerate segments.
  std::size_t first = 0;
  while (!(q[first + 1] > q[first])) ++first;
  std::size_t last = n - 2;
  while (!(q[last + 1] > q[last])) --last;
  const double low_slope = slope[first];
  const double high_slope = slope[last];

  auto map = [&](double x) {
    if (x < q.front()) return s.front() + (x - q.front()) * low_slope;
    if (x >= q.back()) return s.back() + (x - q.back()) * high_slope;
    // q[k] <= x < q[k+1] with q[k+1] > q[k].
    const auto k = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), x) - q.begin()) - 1;
    return s[k] + (x - q[k]) * slope[k];
  };

  std::vector<double> out(v.size());
  std::transform(v.data().begin(), v.data().end(), out.begin(), map);
  return Volume(v.geometry(), std::move(out));
}

std::string to_json(const NyulModel& model) {
  nlohmann::ordered_json j;
  j["ranks"] = model.ranks;
  j["standard_landmarks"] = model.standard_landmarks;
  j["scale_bounds"] = model.scale_bounds;
  return j.dump(2);
}

NyulModel nyul_from_json(std::string_view text) {
  NyulModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    model.ranks = j.at("ranks").get<std::vector<double>>();
    model.standard_landmarks = j.at("standard_landmarks").get<std::vector<double>>();
    model.scale_bounds = j.at("scale_bounds").get<std::array<double, 2>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid Nyul model JSON: ") + e.what());
  }
  validate(model);
  return model;
}

}  // namespace ipmn
