#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ipmn/error.hpp"
#include "ipmn/percentile.hpp"
#include "ipmn/radiomics.hpp"

namespace ipmn {

NamedValues firstorder_features(const Volume& v, const Mask& m, int ng) {
  require_same_geometry(v.geometry(), m.geometry());
  std::vector<double> x;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i]) x.push_back(v[i]);
  }
  if (x.empty()) throw InvalidArgument("first-order features need a nonempty mask");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());

  const double minimum = x.front();
  const double maximum = x.back();
  const double range = maximum - minimum;
  const double p10 = percentile_sorted(x, 10.0);
  const double p90 = percentile_sorted(x, 90.0);
  const double median = percentile_sorted(x, 50.0);
  const double iqr = percentile_sorted(x, 75.0) - percentile_sorted(x, 25.0);

  double energy = 0.0, sum = 0.0;
  for (double a : x) {
    energy += a * a;
    sum += a;
  }
  const double mean = sum / n;
  const double rms = std::sqrt(energy / n);

  // Central moments; a constant sample has all of them exactly zero.
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, mad = 0.0;
  if (range > 0.0) {
    for (double a : x) {
      const double c = a - mean;
      m2 += c * c;
      m3 += c * c * c;
      m4 += c * c * c * c;
      mad += std::abs(c);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;
  }
  const double variance = m2;
  const double skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;

  // Robust MAD over the 10th..90th percentile subset.
  double rmad = 0.0;
  if (range > 0.0) {
    double rsum = 0.0, rn = 0.0;
    for (double a : x) {
      if (a >= p10 && a <= p90) {
        rsum += a;
        rn += 1.0;
      }
    }
    const double rmean = rsum / rn;
    for (double a : x) {
      if (a >= p10 && a <= p90) rmad += std::abs(a - rmean);
    }
    rmad /= rn;
  }

  // Entropy and uniformity use the discretized histogram.
  const DiscretizedRoi d = discretize(v, m, ng);
  std::vector<double> hist(d.ng, 0.0);
  for (int l : d.levels) {
    if (l > 0) hist[l - 1] += 1.0;
  }
  double entropy = 0.0, uniformity = 0.0;
  for (double h : hist) {
    if (h == 0.0) continue;
    const double p = h / n;
    entropy -= p * std::log2(p);
    uniformity += p * p;
  }

  NamedValues out;
  out.add("10Percentile", p10);
  out.add("90Percentile", p90);
  out.add("Energy", energy);
  out.add("Entropy", entropy);
  out.add("InterquartileRange", iqr);
  out.add("Kurtosis", kurtosis);
  out.add("Maximum", maximum);
  out.add("MeanAbsoluteDeviation", mad);
  out.add("Mean", mean);
  out.add("Median", median);
  out.add("Minimum", minimum);
  out.add("Range", range);
  out.add("RobustMeanAbsoluteDeviation", rmad);
  out.add("RootMeanSquared", rms);
  out.add("Skewness", skewness);
  out.add("StandardDeviation", std::sqrt(variance));
  out.add("Uniformity", uniformity);
  out.add("Variance", variance);
  return out;
}

}  // namespace ipmn
