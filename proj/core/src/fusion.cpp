#include "ipmn/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "ipmn/csv.hpp"
#include "ipmn/error.hpp"
#include "ipmn/feature_table.hpp"

namespace ipmn {

void validate_probability(std::span<const double> p, double tol) {
  if (p.empty()) throw InvalidArgument("empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("probability component outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw InvalidArgument("probability vector does not sum to 1");
}

void validate(const FusionParams& params) {
  if (!(params.k >= 0.0 && params.k <= 1.0)) throw InvalidArgument("fusion k must lie in [0, 1]");
  if (!(params.t > 0.0 && params.t <= 1.01)) throw InvalidArgument("fusion t must lie in (0, 1.01]");
}

ProbabilityVector fuse(std::span<const double> p_d, std::span<const double> p_r, const FusionParams& params) {
  validate(params);
  validate_probability(p_d);
  validate_probability(p_r);
  if (p_d.size() != p_r.size()) throw InvalidArgument("probability vectors differ in length");
  const double top = *std::max_element(p_r.begin(), p_r.end());
  ProbabilityVector out(p_r.begin(), p_r.end());
  if (top >= params.t) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = params.k * p_d[i] + (1.0 - params.k) * p_r[i];
  return out;
}

int argmax(std::span<const double> p) {
  if (p.empty()) throw InvalidArgument("argmax of an empty vector");
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<double> default_k_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

std::vector<double> default_t_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 11; ++i) g.push_back((34 + 6 * i) / 100.0);
  g.push_back(1.01);
  return g;
}

double fused_accuracy(std::span<const FusionCase> cases, const FusionParams& params) {
  if (cases.empty()) throw InvalidArgument("fusion needs at least one case");
  int correct = 0;
  for (const auto& c : cases) {
    if (argmax(fuse(c.p_d, c.p_r, params)) == c.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(cases.size());
}

FusionGridResult fusion_grid_search(std::span<const FusionCase> cases, std::span<const double> k_grid,
                                    std::span<const double> t_grid) {
  if (cases.empty() || k_grid.empty() || t_grid.empty()) throw InvalidArgument("fusion grid search needs cases and grids");
  FusionGridResult r;
  r.k_grid.assign(k_grid.begin(), k_grid.end());
  r.t_grid.assign(t_grid.begin(), t_grid.end());
  std::sort(r.k_grid.begin(), r.k_grid.end());
  std::sort(r.t_grid.begin(), r.t_grid.end());
  r.accuracy.assign(r.t_grid.size(), std::vector<double>(r.k_grid.size(), 0.0));
  bool first = true;
  for (std::size_t ti = 0; ti < r.t_grid.size(); ++ti) {
    for (std::size_t ki = 0; ki < r.k_grid.size(); ++ki) {
      const FusionParams p{r.k_grid[ki], r.t_grid[ti]};
      const double acc = fused_accuracy(cases, p);
      r.accuracy[ti][ki] = acc;
      if (first || acc > r.best_accuracy) {
        r.best = p;
        r.best_accuracy = acc;
        first = false;
      }
    }
  }
  return r;
}

const ProbabilityVector& DlProbabilities::at(const std::string& case_id) const {
  const auto it = std::find(case_ids.begin(), case_ids.end(), case_id);
  if (it == case_ids.end()) throw DataError("no deep-learning probabilities for case " + case_id);
  return probs[static_cast<std::size_t>(it - case_ids.begin())];
}

DlProbabilities read_dl_probabilities(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::vector<std::string> expected{"case_id", "p_healthy", "p_low", "p_high"};
  if (t.header != expected) throw FormatError(path.string() + ": expected header case_id,p_healthy,p_low,p_high");
  DlProbabilities dl;
  for (const auto& row : t.rows) {
    if (row.size() != expected.size()) throw FormatError(path.string() + ": ragged row");
    ProbabilityVector p;
    for (std::size_t c = 1; c < row.size(); ++c) p.push_back(csv::parse_double(row[c], row[0]));
    try {
      validate_probability(p, 1e-6);
    } catch (const InvalidArgument& e) {
      throw DataError(path.string() + ": case " + row[0] + ": " + e.what());
    }
    if (std::find(dl.case_ids.begin(), dl.case_ids.end(), row[0]) != dl.case_ids.end()) {
      throw DataError(path.string() + ": duplicate case " + row[0]);
    }
    dl.case_ids.push_back(row[0]);
    dl.probs.push_back(std::move(p));
  }
  return dl;
}

void write_dl_probabilities(const DlProbabilities& dl, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"case_id", "p_healthy", "p_low", "p_high"};
  for (std::size_t i = 0; i < dl.case_ids.size(); ++i) {
    std::vector<std::string> row{dl.case_ids[i]};
    for (double v : dl.probs[i]) row.push_back(csv::format_double(v));
    t.rows.push_back(std::move(row));
  }
  csv::write(t, path);
}

std::string to_json(const FusionGridResult& result) {
  nlohmann::ordered_json j;
  j["k"] = result.best.k;
  j["t"] = result.best.t;
  j["selection_accuracy"] = result.best_accuracy;
  j["k_grid"] = result.k_grid;
  j["t_grid"] = result.t_grid;
  j["accuracy"] = result.accuracy;
  return j.dump(1);
}

}  // namespace ipmn
