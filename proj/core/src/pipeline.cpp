#include "ipmn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>

#include "ipmn/clinical.hpp"
#include "ipmn/csv.hpp"
#include "ipmn/error.hpp"
#include "ipmn/nifti.hpp"
#include "ipmn/parallel.hpp"
#include "ipmn/phantom.hpp"
#include "ipmn/random.hpp"

namespace ipmn {

Volume preprocess_volume(const Volume& v, const PreprocessSettings& s) {
  Volume out = resample_isotropic(reorient_ras(v), s.resample_mm, Interpolation::linear);
  out = correct_bias(out, s.bias_sigma_mm);
  return denoise_median(out, s.median_radius);
}

PreprocessedCase preprocess_case(const Volume& t1, const Volume& t2, const Mask& mask, const PreprocessSettings& s) {
  require_same_geometry(t1.geometry(), mask.geometry());
  require_same_geometry(t2.geometry(), mask.geometry());
  const Mask m = resample_isotropic(reorient_ras(mask), s.resample_mm);
  if (foreground_count(m) == 0) throw DataError("mask is empty after resampling");
  const Volume a = preprocess_volume(t1, s);
  const Volume b = preprocess_volume(t2, s);
  const RoiBox box = mask_bounding_box(m, s.roi_margin_vox);
  return {crop_roi(a, box), crop_roi(b, box), crop_roi(m, box), box};
}

std::vector<std::string> contrast_feature_names(Contrast c) {
  std::vector<std::string> out;
  for (const auto& n : canonical_feature_names()) out.push_back(std::string(to_string(c)) + "_" + n);
  return out;
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, std::string_view where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      throw FormatError("unknown config key '" + it.key() + "' in " + std::string(where));
    }
  }
}

}  // namespace

PipelineConfig pipeline_config_from_json(std::string_view text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j, {"study_dir", "out_dir", "dl_probabilities", "seed", "jobs", "split", "preprocess", "radiomics",
                       "clinical", "gbt", "fusion", "ablation", "debug"},
                   "config");
    if (j.contains("study_dir")) c.study_dir = j["study_dir"].get<std::string>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("dl_probabilities") && !j["dl_probabilities"].is_null()) {
      c.dl_probabilities = j["dl_probabilities"].get<std::string>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    c.jobs = j.value("jobs", c.jobs);
    if (j.contains("split")) {
      const auto& s = j["split"];
      reject_unknown(s, {"test_fraction", "cv_folds"}, "split");
      c.test_fraction = s.value("test_fraction", c.test_fraction);
      c.cv_folds = s.value("cv_folds", c.cv_folds);
    }
    if (j.contains("preprocess")) {
      const auto& p = j["preprocess"];
      reject_unknown(p, {"resample_mm", "bias_sigma_mm", "median_radius", "roi_margin_vox", "nyul_ranks"}, "preprocess");
      c.preprocess.resample_mm = p.value("resample_mm", c.preprocess.resample_mm);
      c.preprocess.bias_sigma_mm = p.value("bias_sigma_mm", c.preprocess.bias_sigma_mm);
      c.preprocess.median_radius = p.value("median_radius", c.preprocess.median_radius);
      c.preprocess.roi_margin_vox = p.value("roi_margin_vox", c.preprocess.roi_margin_vox);
      if (p.contains("nyul_ranks")) c.nyul_ranks = p["nyul_ranks"].get<std::vector<double>>();
    }
    if (j.contains("radiomics")) {
      reject_unknown(j["radiomics"], {"bin_count"}, "radiomics");
      c.bin_count = j["radiomics"].value("bin_count", c.bin_count);
    }
    if (j.contains("clinical")) {
      const auto& k = j["clinical"];
      reject_unknown(k, {"impute", "p_enter", "p_remove"}, "clinical");
      c.impute_clinical = k.value("impute", c.impute_clinical);
      c.p_enter = k.value("p_enter", c.p_enter);
      c.p_remove = k.value("p_remove", c.p_remove);
    }
    if (j.contains("gbt")) {
      const auto& g = j["gbt"];
      reject_unknown(g, {"learning_rate", "min_leaf", "lambda", "grid_n_estimators", "grid_max_depth"}, "gbt");
      c.gbt.learning_rate = g.value("learning_rate", c.gbt.learning_rate);
      c.gbt.min_leaf = g.value("min_leaf", c.gbt.min_leaf);
      c.gbt.lambda = g.value("lambda", c.gbt.lambda);
      if (g.contains("grid_n_estimators")) c.grid_n_estimators = g["grid_n_estimators"].get<std::vector<int>>();
      if (g.contains("grid_max_depth")) c.grid_max_depth = g["grid_max_depth"].get<std::vector<int>>();
    }
    if (j.contains("fusion")) {
      const auto& f = j["fusion"];
      reject_unknown(f, {"k_grid", "t_grid"}, "fusion");
      if (f.contains("k_grid")) c.k_grid = f["k_grid"].get<std::vector<double>>();
      if (f.contains("t_grid")) c.t_grid = f["t_grid"].get<std::vector<double>>();
    }
    c.ablation = j.value("ablation", c.ablation);
    if (j.contains("debug")) {
      reject_unknown(j["debug"], {"pollute_scaler_with_test_case"}, "debug");
      c.debug_pollute_scaler = j["debug"].value("pollute_scaler_with_test_case", false);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid config JSON: ") + e.what());
  }
  return c;
}

std::string to_json(const PipelineConfig& c) {
  ordered_json j;
  j["study_dir"] = c.study_dir.string();
  j["out_dir"] = c.out_dir.string();
  j["dl_probabilities"] = c.dl_probabilities ? ordered_json(c.dl_probabilities->string()) : ordered_json(nullptr);
  j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
  j["split"] = {{"test_fraction", c.test_fraction}, {"cv_folds", c.cv_folds}};
  j["preprocess"] = {{"resample_mm", c.preprocess.resample_mm},
                     {"bias_sigma_mm", c.preprocess.bias_sigma_mm},
                     {"median_radius", c.preprocess.median_radius},
                     {"roi_margin_vox", c.preprocess.roi_margin_vox},
                     {"nyul_ranks", c.nyul_ranks}};
  j["radiomics"] = {{"bin_count", c.bin_count}};
  j["clinical"] = {{"impute", c.impute_clinical}, {"p_enter", c.p_enter}, {"p_remove", c.p_remove}};
  j["gbt"] = {{"learning_rate", c.gbt.learning_rate},
              {"min_leaf", c.gbt.min_leaf},
              {"lambda", c.gbt.lambda},
              {"grid_n_estimators", c.grid_n_estimators},
              {"grid_max_depth", c.grid_max_depth}};
  j["fusion"] = {{"k_grid", c.k_grid}, {"t_grid", c.t_grid}};
  j["ablation"] = c.ablation;
  j["debug"] = {{"pollute_scaler_with_test_case", c.debug_pollute_scaler}};
  return j.dump(1);
}

void check_leakage(const std::vector<std::string>& test_ids, const TrainingLists& artifacts) {
  const std::set<std::string> test(test_ids.begin(), test_ids.end());
  for (const auto& [name, ids] : artifacts) {
    for (const auto& id : ids) {
      if (test.count(id)) throw LeakageError("blind-test case " + id + " was used to fit the " + name);
    }
  }
}

namespace {

class StageTimer {
 public:
  void stage(std::string_view name) {
    const auto now = std::chrono::steady_clock::now();
    if (!current_.empty()) {
      std::cerr << "[ipmn] " << current_ << ": " << std::chrono::duration<double>(now - start_).count() << " s\n";
    }
    current_ = name;
    start_ = now;
  }
  void done() { stage(""); }

 private:
  std::string current_;
  std::chrono::steady_clock::time_point start_;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::size_t> column_subset(const FeatureTable& t, std::initializer_list<std::string_view> prefixes) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    for (auto p : prefixes) {
      if (t.columns[c].starts_with(p)) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, const FeatureTable& test,
                       const std::vector<std::vector<double>>& radiomics,
                       const std::vector<std::vector<double>>* fused) {
  csv::Table t;
  t.header = {"case_id", "center", "label", "p_healthy", "p_low", "p_high", "pred"};
  if (fused) {
    for (auto h : {"fused_p_healthy", "fused_p_low", "fused_p_high", "fused_pred"}) t.header.emplace_back(h);
  }
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    std::vector<std::string> row{test.case_ids[i], test.centers[i], std::to_string(test.labels[i])};
    for (double p : radiomics[i]) row.push_back(csv::format_double(p));
    row.push_back(std::to_string(argmax(radiomics[i])));
    if (fused) {
      for (double p : (*fused)[i]) row.push_back(csv::format_double(p));
      row.push_back(std::to_string(argmax((*fused)[i])));
    }
    t.rows.push_back(std::move(row));
  }
  csv::write(t, path);
}

void write_roc(const std::filesystem::path& path, const std::vector<RocPoint>& points, std::string_view source,
               csv::Table& t) {
  if (t.header.empty()) t.header = {"source", "class", "threshold", "fpr", "tpr"};
  for (const auto& p : points) {
    t.rows.push_back({std::string(source), std::string(kClassNames[p.cls]), csv::format_double(p.threshold),
                      csv::format_double(p.fpr), csv::format_double(p.tpr)});
  }
  csv::write(t, path);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!config.seed) throw InvalidArgument("a seed is required for run");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) throw InvalidArgument("test_fraction must lie in (0, 1)");
  if (config.cv_folds < 2) throw InvalidArgument("cv_folds must be at least 2");
  if (config.grid_n_estimators.empty() || config.grid_max_depth.empty()) throw InvalidArgument("empty GBT grid");
  const std::uint64_t seed = *config.seed;
  const auto& out = config.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  StageTimer timer;
  timer.stage("load study");
  const StudyIndex study = read_study_index(config.study_dir / "labels.csv");
  std::vector<ClinicalRecord> clinical_in = read_clinical_csv(config.study_dir / "clinical.csv");
  const std::size_t n = study.case_ids.size();
  std::vector<ClinicalRecord> clinical(n);
  {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < clinical_in.size(); ++i) {
      if (!pos.emplace(clinical_in[i].case_id, i).second) throw DataError("clinical.csv repeats case " + clinical_in[i].case_id);
    }
    if (clinical_in.size() != n) throw DataError("clinical.csv and labels.csv list different numbers of cases");
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = pos.find(study.case_ids[i]);
      if (it == pos.end()) throw DataError("case " + study.case_ids[i] + " is missing from clinical.csv");
      clinical[i] = clinical_in[it->second];
      if (clinical[i].label != study.labels[i]) throw DataError("case " + study.case_ids[i] + " has conflicting labels");
    }
  }

  // Blind test set: fold 0 of a stratified split.
  const int split_k = std::max(2, static_cast<int>(std::lround(1.0 / config.test_fraction)));
  const CvSplit blind = stratified_kfold(study.labels, study.centers, split_k, derive_seed(seed, 101));
  std::vector<std::size_t> train_idx = blind.train_indices(0);
  std::vector<std::size_t> test_idx = blind.test_indices(0);
  PipelineResult result;
  for (std::size_t i : train_idx) result.train_ids.push_back(study.case_ids[i]);
  for (std::size_t i : test_idx) result.test_ids.push_back(study.case_ids[i]);
  {
    ordered_json j;
    j["train"] = result.train_ids;
    j["test"] = result.test_ids;
    write_text(out / "split.json", j.dump(1));
  }

  timer.stage("preprocess");
  std::vector<PreprocessedCase> cases(n);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    const auto dir = config.study_dir / study.case_ids[i];
    try {
      const Mask raw_mask = load_nifti_mask(dir / "mask.nii.gz");
      cases[i] = preprocess_case(load_nifti_volume(dir / "t1.nii.gz"), load_nifti_volume(dir / "t2.nii.gz"), raw_mask,
                                 config.preprocess);
      set_mask_covariates(clinical[i], cases[i].mask);
    } catch (const Error& e) {
      throw Error(e.category(), "case " + study.case_ids[i] + ": " + e.what());
    }
  });

  timer.stage("standardize");
  std::array<NyulModel, 2> nyul;
  for (int c = 0; c < 2; ++c) {
    std::vector<Volume> imgs;
    std::vector<Mask> masks;
    for (std::size_t i : train_idx) {
      imgs.push_back(c == 0 ? cases[i].t1 : cases[i].t2);
      masks.push_back(cases[i].mask);
    }
    nyul[c] = nyul_train(imgs, masks, config.nyul_ranks);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(to_json(nyul[c]));
    j["training_case_ids"] = result.train_ids;
    write_text(out / (c == 0 ? "nyul_t1.json" : "nyul_t2.json"), j.dump(1));
  }

  timer.stage("extract");
  FeatureTable radiomics;
  radiomics.columns = contrast_feature_names(Contrast::t1);
  for (auto& name : contrast_feature_names(Contrast::t2)) radiomics.columns.push_back(std::move(name));
  radiomics.case_ids = study.case_ids;
  radiomics.centers = study.centers;
  radiomics.labels = study.labels;
  radiomics.rows.resize(n);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    const PreprocessedCase& pc = cases[i];
    try {
      auto a = extract_feature_vector(nyul_apply(pc.t1, nyul[0], &pc.mask), pc.mask, config.bin_count, Contrast::t1);
      auto b = extract_feature_vector(nyul_apply(pc.t2, nyul[1], &pc.mask), pc.mask, config.bin_count, Contrast::t2);
      std::vector<double> row = std::move(a.values);
      row.insert(row.end(), b.values.begin(), b.values.end());
      radiomics.rows[i] = std::move(row);
    } catch (const Error& e) {
      throw Error(e.category(), "case " + study.case_ids[i] + ": " + e.what());
    }
  });
  cases.clear();
  write_feature_table(radiomics, out / "features_radiomics.csv");

  timer.stage("clinical");
  if (config.impute_clinical) {
    impute_mean(clinical, train_idx);
  } else {
    require_complete(clinical);
  }
  std::vector<ClinicalRecord> clinical_train;
  for (std::size_t i : train_idx) clinical_train.push_back(clinical[i]);
  const ClinicalScreening screening = screen_clinical(clinical_train, config.p_enter, config.p_remove);
  write_text(out / "clinical_screening.json", to_json(screening));
  const std::vector<std::size_t>& selected = screening.stepwise.selected;
  for (std::size_t k : selected) result.selected_clinical.emplace_back(kClinicalColumns[k]);
  FeatureTable full = join_columns(radiomics, clinical_feature_table(clinical, selected));
  write_feature_table(full, out / "features.csv");

  timer.stage("scale");
  FeatureTable train_raw = full.select_rows(train_idx);
  FeatureTable scaler_input = train_raw;
  if (config.debug_pollute_scaler && !test_idx.empty()) {
    std::vector<std::size_t> polluted = train_idx;
    polluted.push_back(test_idx.front());
    scaler_input = full.select_rows(polluted);
  }
  const FeatureScaler scaler = fit_scaler(scaler_input);
  write_text(out / "scaler.json", to_json(scaler));
  const FeatureTable train = apply_scaler(scaler, train_raw);
  const FeatureTable test = apply_scaler(scaler, full.select_rows(test_idx));

  timer.stage("grid search");
  GbtParams base = config.gbt;
  base.seed = seed;
  std::vector<GbtParams> grid;
  for (int ne : config.grid_n_estimators) {
    for (int md : config.grid_max_depth) {
      GbtParams p = base;
      p.n_estimators = ne;
      p.max_depth = md;
      grid.push_back(p);
    }
  }
  const std::uint64_t cv_seed = derive_seed(seed, 202);
  const GridSearchResult gs = grid_search(train, grid, config.cv_folds, cv_seed, config.jobs);
  write_text(out / "grid_search.json", to_json(gs));
  result.best_params = gs.best_params();

  timer.stage("final fit");
  const GbtModel model = gbt_fit(train, result.best_params);
  write_text(out / "model.json", to_json(model));

  // Every artifact fitted so far must exclude the blind test set.
  TrainingLists lists{{"Nyul standardization (T1)", result.train_ids},
                      {"Nyul standardization (T2)", result.train_ids},
                      {"clinical stepwise selection", screening.training_case_ids},
                      {"feature scaler", scaler.training_case_ids},
                      {"GBT classifier", model.training_case_ids}};
  check_leakage(result.test_ids, lists);

  const auto test_proba = gbt_predict_proba(model, test);
  result.radiomics = evaluate(test_proba, test.labels);

  const CvSplit cv = stratified_kfold(train.labels, train.centers, config.cv_folds, cv_seed);
  std::vector<std::vector<double>> fused_proba;
  ordered_json fusion_json;
  if (config.dl_probabilities) {
    timer.stage("fusion");
    const DlProbabilities dl = read_dl_probabilities(*config.dl_probabilities);
    const auto oof = out_of_fold_proba(train, cv, result.best_params, config.jobs);
    std::vector<FusionCase> selection;
    for (std::size_t i = 0; i < train.n_rows(); ++i) selection.push_back({dl.at(train.case_ids[i]), oof[i], train.labels[i]});
    const FusionGridResult fg = fusion_grid_search(selection, config.k_grid, config.t_grid);
    result.fusion_params = fg.best;
    for (std::size_t i = 0; i < test.n_rows(); ++i) fused_proba.push_back(fuse(dl.at(test.case_ids[i]), test_proba[i], fg.best));
    result.fused = evaluate(fused_proba, test.labels);
    fusion_json = ordered_json::parse(to_json(fg));
    fusion_json["status"] = "applied";
    write_text(out / "fusion.json", fusion_json.dump(1));
  } else {
    fusion_json["status"] = "skipped";
    fusion_json["notice"] = "fusion skipped: no deep-learning probabilities were supplied";
    std::cerr << "[ipmn] fusion skipped: no deep-learning probabilities were supplied\n";
  }

  if (config.ablation) {
    timer.stage("ablation");
    AblationResult ab;
    auto score = [&](std::initializer_list<std::string_view> prefixes) {
      const auto cols = column_subset(train, prefixes);
      return cv_accuracy(train.select_columns(cols), cv, result.best_params, config.jobs);
    };
    ab.t1 = score({"t1_"});
    ab.t2 = score({"t2_"});
    ab.t1_t2 = score({"t1_", "t2_"});
    ab.t1_t2_clinical = selected.empty() ? ab.t1_t2 : score({"t1_", "t2_", "clinical_"});
    result.ablation = ab;
  }

  timer.stage("report");
  write_predictions(out / "predictions.csv", test, test_proba, result.fused ? &fused_proba : nullptr);
  csv::Table roc;
  write_roc(out / "roc_points.csv", roc_points(test_proba, test.labels), "radiomics", roc);
  if (result.fused) write_roc(out / "roc_points.csv", roc_points(fused_proba, test.labels), "fused", roc);

  ordered_json report;
  report["seed"] = seed;
  report["n_train"] = result.train_ids.size();
  report["n_test"] = result.test_ids.size();
  report["best_params"] = {{"n_estimators", result.best_params.n_estimators}, {"max_depth", result.best_params.max_depth}};
  report["selected_clinical"] = result.selected_clinical;
  report["radiomics"] = ordered_json::parse(to_json(result.radiomics));
  report["fused"] = result.fused ? ordered_json::parse(to_json(*result.fused)) : ordered_json(nullptr);
  report["fusion"] = {{"status", fusion_json["status"]}};
  if (result.fusion_params) {
    report["fusion"]["k"] = result.fusion_params->k;
    report["fusion"]["t"] = result.fusion_params->t;
  } else {
    report["fusion"]["notice"] = fusion_json["notice"];
  }
  if (result.ablation) {
    report["ablation_cv_accuracy"] = {{"t1", result.ablation->t1},
                                      {"t2", result.ablation->t2},
                                      {"t1_t2", result.ablation->t1_t2},
                                      {"t1_t2_clinical", result.ablation->t1_t2_clinical}};
  }
  write_text(out / "report.json", report.dump(1));

  std::string summary;
  char buf[256];
  std::snprintf(buf, sizeof buf, "cases: %zu train, %zu test (seed %llu)\n", result.train_ids.size(),
                result.test_ids.size(), static_cast<unsigned long long>(seed));
  summary += buf;
  std::snprintf(buf, sizeof buf, "selected GBT: n_estimators=%d max_depth=%d (CV accuracy %.4f)\n",
                result.best_params.n_estimators, result.best_params.max_depth, gs.table[gs.best].mean_accuracy);
  summary += buf;
  summary += "selected clinical covariates:";
  for (const auto& s : result.selected_clinical) summary += " " + s;
  summary += result.selected_clinical.empty() ? " none\n" : "\n";
  auto line = [&](const char* name, const EvaluationReport& r) {
    std::snprintf(buf, sizeof buf, "%-10s ACC %.4f  AUC %.4f  PR %.4f  RC %.4f  (n=%zu)\n", name, r.acc, r.auc,
                  r.pr.precision, r.pr.recall, r.n);
    summary += buf;
  };
  line("radiomics", result.radiomics);
  if (result.fused) {
    line("fused", *result.fused);
    std::snprintf(buf, sizeof buf, "fusion parameters: k=%.2f t=%.2f\n", result.fusion_params->k, result.fusion_params->t);
    summary += buf;
  } else {
    summary += "fusion skipped: no deep-learning probabilities were supplied\n";
  }
  if (result.ablation) {
    std::snprintf(buf, sizeof buf, "ablation CV accuracy: T1 %.4f  T2 %.4f  T1+T2 %.4f  T1+T2+clinical %.4f\n",
                  result.ablation->t1, result.ablation->t2, result.ablation->t1_t2, result.ablation->t1_t2_clinical);
    summary += buf;
  }
  summary += "AUC is one-vs-rest, macro-averaged over classes.\n";
  write_text(out / "summary.txt", summary);
  timer.done();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace ipmn
