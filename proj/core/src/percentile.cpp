#include "ipmn/percentile.hpp"

#include <algorithm>
#include <cmath>

#include "ipmn/error.hpp"

namespace ipmn {

double percentile_sorted(std::span<const double> sorted, double rank) {
  if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
  if (!(rank >= 0.0 && rank <= 100.0)) throw InvalidArgument("percentile rank outside [0, 100]");
  const double pos = rank / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> percentiles(std::span<const double> values, std::span<const double> ranks) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(ranks.size());
  for (double r : ranks) out.push_back(percentile_sorted(sorted, r));
  return out;
}

double percentile(std::span<const double> values, double rank) {
  const double r[1] = {rank};
  return percentiles(values, r).front();
}

}  // namespace ipmn
