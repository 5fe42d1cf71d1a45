#pragma once

#include <span>
#include <vector>

namespace ipmn {

/// Project-wide percentile: linear interpolation between order statistics
/// (inclusive), i.e. position rank/100 * (n-1) in the sorted sample.
/// `sorted` must be ascending and nonempty; rank in [0, 100].
double percentile_sorted(std::span<const double> sorted, double rank);

/// Copies and sorts, then evaluates every rank.
std::vector<double> percentiles(std::span<const double> values, std::span<const double> ranks);

double percentile(std::span<const double> values, double rank);

}  // namespace ipmn
