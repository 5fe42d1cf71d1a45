#include "ipmn/clinical.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>

#include "ipmn/csv.hpp"
#include "ipmn/error.hpp"

namespace ipmn {

double mask_volume_ml(const Mask& m) {
  const std::size_t n = foreground_count(m);
  if (n == 0) throw InvalidArgument("mask volume needs a nonempty mask");
  return static_cast<double>(n) * m.geometry().voxel_volume_mm3() / 1000.0;
}

double mask_diagonal_mm(const Mask& m) {
  const RoiBox box = mask_bounding_box(m, 0);
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double len = (box.hi[a] - box.lo[a]) * m.spacing()[a];
    d2 += len * len;
  }
  return std::sqrt(d2);
}

void set_mask_covariates(ClinicalRecord& record, const Mask& m) {
  record.values[1] = mask_volume_ml(m);
  record.values[2] = mask_diagonal_mm(m);
  record.values[3] = record.values[1] / record.values[2];
}

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

void recompute_ratio(ClinicalRecord& r) {
  if (!std::isnan(r.values[1]) && !std::isnan(r.values[2])) r.values[3] = r.values[1] / r.values[2];
}

}  // namespace

std::vector<ClinicalRecord> read_clinical_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t id_col = t.column("case_id");
  const std::size_t label_col = t.column("label");
  std::array<std::size_t, kClinicalColumns.size()> cols{};
  for (std::size_t k = 0; k < cols.size(); ++k) cols[k] = t.column(kClinicalColumns[k]);

  std::vector<ClinicalRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    ClinicalRecord r;
    r.case_id = row[id_col];
    r.label = csv::parse_int(row[label_col], "label of " + r.case_id);
    if (r.label < 0 || r.label >= kClassCount) throw DataError("label out of range for " + r.case_id);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::string& cell = row[cols[k]];
      r.values[k] = cell.empty() ? kMissing
                                 : csv::parse_double(cell, std::string(kClinicalColumns[k]) + " of " + r.case_id);
    }
    recompute_ratio(r);
    out.push_back(std::move(r));
  }
  return out;
}

void write_clinical_csv(std::span<const ClinicalRecord> records, const std::filesystem::path& path) {
  csv::Table t;
  t.header.push_back("case_id");
  for (auto c : kClinicalColumns) t.header.emplace_back(c);
  t.header.push_back("label");
  for (const auto& r : records) {
    std::vector<std::string> row{r.case_id};
    for (double v : r.values) row.push_back(std::isnan(v) ? std::string() : csv::format_double(v));
    row.push_back(std::to_string(r.label));
    t.rows.push_back(std::move(row));
  }
  csv::write(t, path);
}

void require_complete(std::span<const ClinicalRecord> records) {
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      if (std::isnan(r.values[k])) {
        throw DataError("missing clinical value '" + std::string(kClinicalColumns[k]) + "' for case " + r.case_id +
                        " (enable imputation to fill with training means)");
      }
    }
  }
}

void impute_mean(std::vector<ClinicalRecord>& records, std::span<const std::size_t> reference) {
  for (std::size_t k = 0; k < kClinicalColumns.size(); ++k) {
    if (k == 3) continue;  // derived
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i : reference) {
      const double v = records.at(i).values[k];
      if (!std::isnan(v)) {
        sum += v;
        ++n;
      }
    }
    if (n == 0) throw DataError("cannot impute '" + std::string(kClinicalColumns[k]) + "': no reference values");
    const double mean = sum / static_cast<double>(n);
    for (auto& r : records) {
      if (std::isnan(r.values[k])) r.values[k] = mean;
    }
  }
  for (auto& r : records) recompute_ratio(r);
}

FeatureTable clinical_feature_table(std::span<const ClinicalRecord> records, std::span<const std::size_t> covariates) {
  FeatureTable t;
  for (std::size_t k : covariates) t.columns.push_back("clinical_" + std::string(kClinicalColumns.at(k)));
  for (const auto& r : records) {
    t.case_ids.push_back(r.case_id);
    t.centers.emplace_back();
    t.labels.push_back(r.label);
    std::vector<double> row;
    for (std::size_t k : covariates) row.push_back(r.values[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

ClinicalScreening screen_clinical(std::span<const ClinicalRecord> records, double p_enter, double p_remove) {
  require_complete(records);
  Columns x(kClinicalColumns.size());
  std::vector<double> y;
  ClinicalScreening s;
  for (const auto& r : records) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k].push_back(r.values[k]);
    y.push_back(r.label);
    s.training_case_ids.push_back(r.case_id);
  }
  // vol_over_diag is an exact function of two other columns but not a linear
  // one, so the full design stays full rank in general. A constant column
  // (e.g. no diabetic cases) still makes it singular, and very small
  // training sets cannot support all covariates at once; the full fit is then
  // left empty and only the stepwise result is reported.
  if (y.size() > x.size() + 1) {
    try {
      s.full_fit = ols_fit(x, y);
    } catch (const NumericError&) {
      s.full_fit = OlsResult{};
    }
  }
  s.stepwise = stepwise_select(x, y, p_enter, p_remove);
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::vector<double> healthy, high;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (records[i].label == 0) healthy.push_back(x[k][i]);
      if (records[i].label == 2) high.push_back(x[k][i]);
    }
    try {
      s.healthy_vs_high[k] = welch_ttest(healthy, high);
    } catch (const Error&) {
      s.healthy_vs_high[k] = TTestResult{0.0, 0.0, 1.0};
    }
  }
  return s;
}

std::string to_json(const ClinicalScreening& s) {
  using nlohmann::ordered_json;
  auto terms = [](const OlsResult& fit, const std::vector<std::size_t>& idx) {
    ordered_json arr = ordered_json::array();
    for (std::size_t t = 0; t < fit.coefficients.size(); ++t) {
      ordered_json term;
      term["term"] = t == 0 ? std::string("intercept") : std::string(kClinicalColumns[idx[t - 1]]);
      term["coef"] = fit.coefficients[t];
      term["se"] = fit.std_errors[t];
      term["t"] = fit.t_stats[t];
      term["p"] = fit.p_values[t];
      arr.push_back(term);
    }
    return arr;
  };
  std::vector<std::size_t> all(kClinicalColumns.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;

  ordered_json j;
  j["target"] = "ordinal label (healthy=0, low=1, high=2)";
  j["n"] = s.full_fit.n;
  j["ols"] = {{"r_squared", s.full_fit.r_squared}, {"dof", s.full_fit.dof}, {"terms", terms(s.full_fit, all)}};
  ordered_json selected = ordered_json::array();
  for (std::size_t k : s.stepwise.selected) selected.push_back(kClinicalColumns[k]);
  j["stepwise"] = {{"selected", selected},
                   {"r_squared", s.stepwise.fit.r_squared},
                   {"terms", terms(s.stepwise.fit, s.stepwise.selected)}};
  ordered_json tt = ordered_json::object();
  for (std::size_t k = 0; k < kClinicalColumns.size(); ++k) {
    const auto& r = s.healthy_vs_high[k];
    tt[std::string(kClinicalColumns[k])] = {{"t", r.t}, {"dof", r.dof}, {"p", r.p}};
  }
  j["welch_healthy_vs_high"] = tt;
  j["training_case_ids"] = s.training_case_ids;
  return j.dump(2);
}

}  // namespace ipmn
