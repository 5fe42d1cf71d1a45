// ipmn: command line front end for the risk-stratification pipeline.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ipmn/clinical.hpp"
#include "ipmn/cross_validation.hpp"
#include "ipmn/csv.hpp"
#include "ipmn/error.hpp"
#include "ipmn/feature_table.hpp"
#include "ipmn/fusion.hpp"
#include "ipmn/gbt.hpp"
#include "ipmn/metrics.hpp"
#include "ipmn/nifti.hpp"
#include "ipmn/phantom.hpp"
#include "ipmn/pipeline.hpp"
#include "ipmn/preprocess.hpp"
#include "ipmn/radiomics.hpp"

namespace fs = std::filesystem;
using namespace ipmn;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text << '\n';
}

void write_probabilities(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& probs,
                         const fs::path& path) {
  DlProbabilities d{ids, probs};
  write_dl_probabilities(d, path);
}

// ---- phantom ---------------------------------------------------------------

struct PhantomArgs {
  fs::path out;
  fs::path spec;
  std::uint64_t seed = 1;
  int per_class = 0;
  int jobs = 1;
  fs::path dl_out;
  double dl_strength = 2.5;
  double dl_noise = 1.0;
};

void cmd_phantom(const PhantomArgs& a) {
  PhantomSpec spec = a.spec.empty() ? PhantomSpec{} : phantom_spec_from_json(slurp(a.spec));
  spec.seed = a.seed;
  if (a.per_class > 0) spec.cases_per_class = {a.per_class, a.per_class, a.per_class};
  const StudyIndex idx = generate_study(spec, a.out, a.jobs);
  std::cerr << "wrote " << idx.case_ids.size() << " cases to " << a.out << "\n";
  if (!a.dl_out.empty()) {
    write_dl_probabilities(synthetic_dl_probabilities(idx, spec.seed, a.dl_strength, a.dl_noise), a.dl_out);
  }
}

// ---- preprocess --------------------------------------------------------------

struct PreprocessArgs {
  fs::path t1, t2, mask, out;
  PreprocessSettings settings;
};

void cmd_preprocess(const PreprocessArgs& a) {
  const PreprocessedCase pc = preprocess_case(load_nifti_volume(a.t1), load_nifti_volume(a.t2), load_nifti_mask(a.mask),
                                              a.settings);
  fs::create_directories(a.out);
  save_nifti(pc.t1, a.out / "t1.nii.gz");
  save_nifti(pc.t2, a.out / "t2.nii.gz");
  save_nifti(pc.mask, a.out / "mask.nii.gz");
}

// ---- extract -----------------------------------------------------------------

struct ExtractArgs {
  fs::path image, mask, out, nyul;
  std::string contrast = "t1";
  int bins = kDefaultBinCount;
};

void cmd_extract(const ExtractArgs& a) {
  Volume v = load_nifti_volume(a.image);
  const Mask m = load_nifti_mask(a.mask);
  if (!a.nyul.empty()) v = nyul_apply(v, nyul_from_json(slurp(a.nyul)), &m);
  const Contrast c = a.contrast == "t2" ? Contrast::t2 : Contrast::t1;
  const FeatureVector fv = extract_feature_vector(v, m, a.bins, c);
  csv::Table t;
  t.header = {"feature", "value"};
  for (std::size_t k = 0; k < fv.names.size(); ++k) {
    t.rows.push_back({std::string(to_string(c)) + "_" + fv.names[k], csv::format_double(fv.values[k])});
  }
  if (a.out.empty()) {
    std::cout << csv::to_string(t);
  } else {
    csv::write(t, a.out);
  }
}

// ---- clinical ----------------------------------------------------------------

struct ClinicalArgs {
  fs::path csv, out;
  bool impute = false;
  double p_enter = 0.05, p_remove = 0.10;
};

void cmd_clinical(const ClinicalArgs& a) {
  auto records = read_clinical_csv(a.csv);
  if (a.impute) {
    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    impute_mean(records, all);
  }
  const std::string json = to_json(screen_clinical(records, a.p_enter, a.p_remove));
  if (a.out.empty()) {
    std::cout << json << '\n';
  } else {
    spit(a.out, json);
  }
}

// ---- train / predict -----------------------------------------------------------

struct TrainArgs {
  fs::path features, model_out, scaler_out, grid_out;
  std::uint64_t seed = 0;
  bool no_grid = false;
  int n_estimators = 140, max_depth = 4, cv_folds = 5, jobs = 1;
  double learning_rate = 0.1, lambda = 1.0;
  int min_leaf = 1;
};

void cmd_train(const TrainArgs& a) {
  const FeatureTable raw = read_feature_table(a.features);
  const FeatureScaler scaler = fit_scaler(raw);
  const FeatureTable table = apply_scaler(scaler, raw);
  GbtParams p;
  p.seed = a.seed;
  p.n_estimators = a.n_estimators;
  p.max_depth = a.max_depth;
  p.learning_rate = a.learning_rate;
  p.lambda = a.lambda;
  p.min_leaf = a.min_leaf;
  if (!a.no_grid) {
    const auto grid = default_param_grid(p);
    const GridSearchResult gs = grid_search(table, grid, a.cv_folds, a.seed, a.jobs);
    p = gs.best_params();
    if (!a.grid_out.empty()) spit(a.grid_out, to_json(gs));
    std::cerr << "grid search: n_estimators=" << p.n_estimators << " max_depth=" << p.max_depth
              << " CV accuracy=" << gs.table[gs.best].mean_accuracy << "\n";
  }
  spit(a.model_out, to_json(gbt_fit(table, p)));
  if (!a.scaler_out.empty()) spit(a.scaler_out, to_json(scaler));
}

struct PredictArgs {
  fs::path model, features, scaler, out;
};

void cmd_predict(const PredictArgs& a) {
  const GbtModel model = gbt_from_json(slurp(a.model));
  FeatureTable table = read_feature_table(a.features);
  if (!a.scaler.empty()) table = apply_scaler(scaler_from_json(slurp(a.scaler)), table);
  if (!model.feature_names.empty()) {
    std::vector<std::size_t> cols;
    for (const auto& name : model.feature_names) cols.push_back(table.column_index(name));
    table = table.select_columns(cols);
  }
  write_probabilities(table.case_ids, gbt_predict_proba(model, table), a.out);
}

// ---- fuse ----------------------------------------------------------------------

struct FuseArgs {
  fs::path dl, radiomics, out, labels, grid_out;
  double k = 0.5, t = 0.7;
  bool select = false;
};

void cmd_fuse(const FuseArgs& a) {
  const DlProbabilities dl = read_dl_probabilities(a.dl);
  const DlProbabilities rad = read_dl_probabilities(a.radiomics);
  FusionParams params{a.k, a.t};
  if (a.select) {
    if (a.labels.empty()) throw InvalidArgument("--select needs --labels");
    const StudyIndex idx = read_study_index(a.labels);
    std::vector<FusionCase> cases;
    for (std::size_t i = 0; i < rad.case_ids.size(); ++i) {
      const auto it = std::find(idx.case_ids.begin(), idx.case_ids.end(), rad.case_ids[i]);
      if (it == idx.case_ids.end()) throw DataError("no label for case " + rad.case_ids[i]);
      cases.push_back({dl.at(rad.case_ids[i]), rad.probs[i], idx.labels[it - idx.case_ids.begin()]});
    }
    const FusionGridResult r = fusion_grid_search(cases, default_k_grid(), default_t_grid());
    params = r.best;
    if (!a.grid_out.empty()) spit(a.grid_out, to_json(r));
    std::cerr << "selected k=" << params.k << " t=" << params.t << " accuracy=" << r.best_accuracy << "\n";
  }
  std::vector<std::vector<double>> fused;
  for (std::size_t i = 0; i < rad.case_ids.size(); ++i) fused.push_back(fuse(dl.at(rad.case_ids[i]), rad.probs[i], params));
  write_probabilities(rad.case_ids, fused, a.out);
}

// ---- evaluate --------------------------------------------------------------------

struct EvaluateArgs {
  fs::path probs, labels, out, roc;
  fs::path mask_a, mask_b;
};

void cmd_evaluate(const EvaluateArgs& a) {
  if (!a.mask_a.empty() || !a.mask_b.empty()) {
    const Mask ma = load_nifti_mask(a.mask_a);
    const Mask mb = load_nifti_mask(a.mask_b);
    nlohmann::ordered_json j{{"dice", dice(ma, mb)}, {"hd95_mm", hd95(ma, mb)}};
    std::cout << j.dump(1) << '\n';
    return;
  }
  const DlProbabilities p = read_dl_probabilities(a.probs);
  const StudyIndex idx = read_study_index(a.labels);
  std::vector<int> labels;
  for (const auto& id : p.case_ids) {
    const auto it = std::find(idx.case_ids.begin(), idx.case_ids.end(), id);
    if (it == idx.case_ids.end()) throw DataError("no label for case " + id);
    labels.push_back(idx.labels[it - idx.case_ids.begin()]);
  }
  const std::string json = to_json(evaluate(p.probs, labels));
  if (a.out.empty()) {
    std::cout << json << '\n';
  } else {
    spit(a.out, json);
  }
  if (!a.roc.empty()) {
    csv::Table t;
    t.header = {"class", "threshold", "fpr", "tpr"};
    for (const auto& r : roc_points(p.probs, labels)) {
      t.rows.push_back({std::string(kClassNames[r.cls]), csv::format_double(r.threshold), csv::format_double(r.fpr),
                        csv::format_double(r.tpr)});
    }
    csv::write(t, a.roc);
  }
}

// ---- run -----------------------------------------------------------------------

struct RunArgs {
  fs::path config, study, out, dl;
  std::uint64_t seed = 0;
  int jobs = 0;
  double test_fraction = 0.0;
  int cv_folds = 0;
  bool no_ablation = false;
  bool impute = false;
};

int cmd_run(const RunArgs& a) {
  PipelineConfig c = a.config.empty() ? PipelineConfig{} : pipeline_config_from_json(slurp(a.config));
  c.seed = a.seed;
  if (!a.study.empty()) c.study_dir = a.study;
  if (!a.out.empty()) c.out_dir = a.out;
  if (!a.dl.empty()) c.dl_probabilities = a.dl;
  if (a.jobs > 0) c.jobs = a.jobs;
  if (a.test_fraction > 0.0) c.test_fraction = a.test_fraction;
  if (a.cv_folds > 0) c.cv_folds = a.cv_folds;
  if (a.no_ablation) c.ablation = false;
  if (a.impute) c.impute_clinical = true;
  if (c.study_dir.empty() || c.out_dir.empty()) throw InvalidArgument("run needs a study directory and an output directory");
  const PipelineResult r = run_pipeline(c);
  std::cout << slurp(c.out_dir / "summary.txt");
  std::cerr << "total " << r.seconds << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IPMN risk stratification: preprocessing, radiomics, boosting and decision fusion"};
  app.require_subcommand(1);

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic multi-center study");
  phantom->add_option("--out", ph.out, "Study directory")->required();
  phantom->add_option("--seed", ph.seed, "Random seed");
  phantom->add_option("--spec", ph.spec, "Phantom spec JSON")->check(CLI::ExistingFile);
  phantom->add_option("--cases-per-class", ph.per_class, "Override the per-class case count");
  phantom->add_option("--jobs", ph.jobs, "Worker threads");
  phantom->add_option("--dl-probs", ph.dl_out, "Also write synthetic deep-learning probabilities here");
  phantom->add_option("--dl-strength", ph.dl_strength, "Logit margin of the true class");
  phantom->add_option("--dl-noise", ph.dl_noise, "Logit noise sd");

  PreprocessArgs pp;
  auto* preprocess = app.add_subcommand("preprocess", "Reorient, resample, bias-correct, denoise and crop one case");
  preprocess->add_option("--t1", pp.t1)->required()->check(CLI::ExistingFile);
  preprocess->add_option("--t2", pp.t2)->required()->check(CLI::ExistingFile);
  preprocess->add_option("--mask", pp.mask)->required()->check(CLI::ExistingFile);
  preprocess->add_option("--out", pp.out, "Output directory")->required();
  preprocess->add_option("--resample-mm", pp.settings.resample_mm);
  preprocess->add_option("--bias-sigma-mm", pp.settings.bias_sigma_mm);
  preprocess->add_option("--median-radius", pp.settings.median_radius);
  preprocess->add_option("--roi-margin", pp.settings.roi_margin_vox);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Compute the 107 radiomics features of one image");
  extract->add_option("--image", ex.image)->required()->check(CLI::ExistingFile);
  extract->add_option("--mask", ex.mask)->required()->check(CLI::ExistingFile);
  extract->add_option("--contrast", ex.contrast)->check(CLI::IsMember({"t1", "t2"}));
  extract->add_option("--bins", ex.bins, "Gray-level bin count");
  extract->add_option("--nyul", ex.nyul, "Apply this standardization model first")->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "CSV output (default stdout)");

  ClinicalArgs cl;
  auto* clinical = app.add_subcommand("clinical", "OLS, stepwise selection and t-tests on clinical covariates");
  clinical->add_option("--csv", cl.csv)->required()->check(CLI::ExistingFile);
  clinical->add_option("--out", cl.out, "JSON output (default stdout)");
  clinical->add_flag("--impute", cl.impute, "Mean-impute missing cells");
  clinical->add_option("--p-enter", cl.p_enter);
  clinical->add_option("--p-remove", cl.p_remove);

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit the scaler and the boosted-tree classifier on a feature table");
  train->add_option("--features", tr.features)->required()->check(CLI::ExistingFile);
  train->add_option("--model-out", tr.model_out)->required();
  train->add_option("--scaler-out", tr.scaler_out);
  train->add_option("--grid-out", tr.grid_out);
  train->add_option("--seed", tr.seed);
  train->add_flag("--no-grid", tr.no_grid, "Skip grid search and use the given parameters");
  train->add_option("--n-estimators", tr.n_estimators);
  train->add_option("--max-depth", tr.max_depth);
  train->add_option("--learning-rate", tr.learning_rate);
  train->add_option("--lambda", tr.lambda);
  train->add_option("--min-leaf", tr.min_leaf);
  train->add_option("--cv-folds", tr.cv_folds);
  train->add_option("--jobs", tr.jobs);

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Class probabilities for a feature table");
  predict->add_option("--model", pr.model)->required()->check(CLI::ExistingFile);
  predict->add_option("--features", pr.features)->required()->check(CLI::ExistingFile);
  predict->add_option("--scaler", pr.scaler)->check(CLI::ExistingFile);
  predict->add_option("--out", pr.out)->required();

  FuseArgs fu;
  auto* fusecmd = app.add_subcommand("fuse", "Confidence-gated fusion of deep-learning and radiomics probabilities");
  fusecmd->add_option("--dl", fu.dl)->required()->check(CLI::ExistingFile);
  fusecmd->add_option("--radiomics", fu.radiomics)->required()->check(CLI::ExistingFile);
  fusecmd->add_option("--out", fu.out)->required();
  fusecmd->add_option("-k,--k", fu.k, "Deep-learning weight");
  fusecmd->add_option("-t,--t", fu.t, "Radiomics confidence gate");
  fusecmd->add_flag("--select", fu.select, "Choose k and t by grid search against --labels");
  fusecmd->add_option("--labels", fu.labels)->check(CLI::ExistingFile);
  fusecmd->add_option("--grid-out", fu.grid_out);

  EvaluateArgs ev;
  auto* evaluatecmd = app.add_subcommand("evaluate", "Classification metrics, or Dice/HD95 for two masks");
  evaluatecmd->add_option("--probs", ev.probs)->check(CLI::ExistingFile);
  evaluatecmd->add_option("--labels", ev.labels)->check(CLI::ExistingFile);
  evaluatecmd->add_option("--out", ev.out);
  evaluatecmd->add_option("--roc", ev.roc, "ROC points CSV");
  evaluatecmd->add_option("--mask-a", ev.mask_a)->check(CLI::ExistingFile);
  evaluatecmd->add_option("--mask-b", ev.mask_b)->check(CLI::ExistingFile);

  RunArgs ru;
  auto* run = app.add_subcommand("run", "End-to-end pipeline on a study directory");
  run->add_option("--config", ru.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  run->add_option("--seed", ru.seed)->required();
  run->add_option("--study", ru.study);
  run->add_option("--out", ru.out);
  run->add_option("--dl-probs", ru.dl)->check(CLI::ExistingFile);
  run->add_option("--jobs", ru.jobs);
  run->add_option("--test-fraction", ru.test_fraction);
  run->add_option("--cv-folds", ru.cv_folds);
  run->add_flag("--no-ablation", ru.no_ablation);
  run->add_flag("--impute", ru.impute, "Mean-impute missing clinical cells");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phantom) cmd_phantom(ph);
    if (*preprocess) cmd_preprocess(pp);
    if (*extract) cmd_extract(ex);
    if (*clinical) cmd_clinical(cl);
    if (*train) cmd_train(tr);
    if (*predict) cmd_predict(pr);
    if (*fusecmd) cmd_fuse(fu);
    if (*evaluatecmd) {
      if (ev.mask_a.empty() && (ev.probs.empty() || ev.labels.empty())) {
        throw InvalidArgument("evaluate needs --probs and --labels, or --mask-a and --mask-b");
      }
      cmd_evaluate(ev);
    }
    if (*run) return cmd_run(ru);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.category()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
