#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ipmn/error.hpp"
#include "ipmn/radiomics.hpp"

namespace ipmn {

std::size_t DiscretizedRoi::foreground_count() const {
  return static_cast<std::size_t>(std::count_if(levels.begin(), levels.end(), [](int l) { return l > 0; }));
}

double GrayMatrix::sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

void NamedValues::add(std::string name, double value) {
  names_.push_back(std::move(name));
  values_.push_back(value);
}

double NamedValues::at(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return values_[i];
  }
  throw InvalidArgument("unknown feature name: " + std::string(name));
}

DiscretizedRoi make_discretized(Dims dims, Vec3 spacing, int ng, std::vector<int> levels) {
  if (ng < 1) throw InvalidArgument("bin count must be positive");
  const auto n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  if (levels.size() != n) throw InvalidArgument("level array length does not match dims");
  for (int l : levels) {
    if (l < 0 || l > ng) throw InvalidArgument("gray level outside [0, ng]");
  }
  DiscretizedRoi d;
  d.dims = dims;
  d.spacing = spacing;
  d.ng = ng;
  d.levels = std::move(levels);
  return d;
}

DiscretizedRoi discretize(const Volume& v, const Mask& m, int ng) {
  if (ng < 2) throw InvalidArgument("bin count must be >= 2");
  require_same_geometry(v.geometry(), m.geometry());

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!m[i]) continue;
    if (!any) {
      lo = hi = v[i];
      any = true;
    } else {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
  }
  if (!any) throw InvalidArgument("cannot discretize an empty mask");

  std::vector<int> levels(v.size(), 0);
  const double width = (hi - lo) / ng;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!m[i]) continue;
    if (!(width > 0.0)) {
      levels[i] = 1;
      continue;
    }
    const double bin = std::floor((v[i] - lo) / width) + 1.0;
    levels[i] = static_cast<int>(std::clamp(bin, 1.0, static_cast<double>(ng)));
  }
  return make_discretized(v.dims(), v.spacing(), ng, std::move(levels));
}

}  // namespace ipmn
