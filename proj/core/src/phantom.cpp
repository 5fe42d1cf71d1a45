#include "ipmn/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "ipmn/csv.hpp"
#include "ipmn/error.hpp"
#include "ipmn/nifti.hpp"
#include "ipmn/parallel.hpp"
#include "ipmn/preprocess.hpp"
#include "ipmn/random.hpp"

namespace ipmn {

void validate(const PhantomSpec& spec) {
  for (int n : spec.cases_per_class) {
    if (n <= 0) throw InvalidArgument("phantom class counts must be positive");
  }
  if (spec.centers.empty()) throw InvalidArgument("phantom needs at least one center");
  for (const auto& c : spec.centers) {
    if (!(c.scale > 0.0) || !(c.noise_sd >= 0.0)) throw InvalidArgument("center " + c.name + " has invalid scale or noise");
  }
  for (int d : spec.dims) {
    if (d < 24) throw InvalidArgument("phantom dims must be at least 24");
  }
  if (!(spec.spacing_mm > 0.0)) throw InvalidArgument("phantom spacing must be positive");
  for (const auto& t : spec.class_texture) {
    if (!(t.correlation_mm > 0.0) || t.blob_rate < 0.0 || !(t.blob_radius_mm > 0.0)) {
      throw InvalidArgument("invalid class texture");
    }
  }
  if (spec.bias_field_strength < 0.0 || spec.bias_field_strength >= 1.0) {
    throw InvalidArgument("bias field strength must lie in [0, 1)");
  }
  if (spec.severity_jitter < 0.0 || spec.volume_jitter < 0.0) throw InvalidArgument("jitter must be non-negative");
}

std::string phantom_case_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%04zu", index);
  return buf;
}

int phantom_label(const PhantomSpec& spec, std::size_t index) {
  std::size_t acc = 0;
  for (int c = 0; c < 3; ++c) {
    acc += static_cast<std::size_t>(spec.cases_per_class[c]);
    if (index < acc) return c;
  }
  throw InvalidArgument("case index beyond the study size");
}

namespace {

ClassTexture texture_at(const PhantomSpec& spec, double severity) {
  const double s = std::clamp(severity, 0.0, 2.0);
  const int lo = std::min(1, static_cast<int>(s));
  const double w = s - lo;
  const auto& a = spec.class_texture[lo];
  const auto& b = spec.class_texture[lo + 1];
  return {a.correlation_mm + w * (b.correlation_mm - a.correlation_mm), a.blob_rate + w * (b.blob_rate - a.blob_rate),
          a.blob_radius_mm + w * (b.blob_radius_mm - a.blob_radius_mm)};
}

// Zero-mean, unit-variance correlated noise.
std::vector<double> random_field(const Geometry& g, double correlation_mm, Rng& rng) {
  std::vector<double> noise(g.voxel_count());
  for (double& v : noise) v = rng.normal();
  const Volume blurred = gaussian_blur(Volume(g, std::move(noise)), correlation_mm);
  std::vector<double> f(blurred.data().begin(), blurred.data().end());
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(f.size()));
  for (double& v : f) v = (v - mean) / sd;
  return f;
}

struct Ellipsoid {
  Vec3 center;  // voxel coordinates
  Vec3 axes;    // semi-axes, mm
};

// Smooth multiplicative field: 1 + s * q(x), q a random quadratic scaled to [-1, 1].
std::vector<double> bias_field(const Geometry& g, double strength, Rng& rng) {
  std::array<double, 9> c{};
  for (double& v : c) v = rng.uniform(-1.0, 1.0);
  std::vector<double> q(g.voxel_count());
  double peak = 0.0;
  for (int z = 0; z < g.dims[2]; ++z) {
    for (int y = 0; y < g.dims[1]; ++y) {
      for (int x = 0; x < g.dims[0]; ++x) {
        const double u = 2.0 * x / (g.dims[0] - 1) - 1.0;
        const double v = 2.0 * y / (g.dims[1] - 1) - 1.0;
        const double w = 2.0 * z / (g.dims[2] - 1) - 1.0;
        const double val = c[0] * u + c[1] * v + c[2] * w + c[3] * u * v + c[4] * v * w + c[5] * u * w +
                           c[6] * u * u + c[7] * v * v + c[8] * w * w;
        q[g.index(x, y, z)] = val;
        peak = std::max(peak, std::abs(val));
      }
    }
  }
  for (double& v : q) v = 1.0 + strength * (peak > 0.0 ? v / peak : 0.0);
  return q;
}

struct ContrastLevels {
  double tissue;
  double organ;
  double texture_amp;
  double blob_delta;
};

Volume render_contrast(const PhantomSpec& spec, const Geometry& g, const Mask& mask, const Ellipsoid& organ,
                       const ContrastLevels& lv, double severity, const PhantomCenter& center, Rng& rng) {
  const ClassTexture tex = texture_at(spec, severity);
  const std::vector<double> background = random_field(g, 2.0, rng);
  const std::vector<double> texture = random_field(g, tex.correlation_mm, rng);
  std::vector<double> img(g.voxel_count());
  for (std::size_t i = 0; i < img.size(); ++i) {
    img[i] = mask[i] ? lv.organ + lv.texture_amp * texture[i] : lv.tissue + 0.5 * lv.texture_amp * background[i];
  }

  // Lesions: spheres fully inside the organ.
  const int n_blobs = rng.poisson(tex.blob_rate);
  const double r = tex.blob_radius_mm;
  for (int b = 0; b < n_blobs; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      Vec3 off;
      double rho = 0.0;
      for (int a = 0; a < 3; ++a) {
        off[a] = rng.uniform(-1.0, 1.0) * std::max(organ.axes[a] - r, 0.0);
        const double inner = organ.axes[a] - r;
        if (inner <= 0.0) continue;
        rho += (off[a] / inner) * (off[a] / inner);
      }
      if (rho > 1.0 || organ.axes[0] <= r || organ.axes[1] <= r || organ.axes[2] <= r) continue;
      placed = true;
      const Vec3 c{organ.center[0] + off[0] / g.spacing[0], organ.center[1] + off[1] / g.spacing[1],
                   organ.center[2] + off[2] / g.spacing[2]};
      const double contrast = lv.blob_delta * rng.uniform(0.8, 1.2);
      for (int z = std::max(0, static_cast<int>(c[2] - r - 1)); z <= std::min(g.dims[2] - 1, static_cast<int>(c[2] + r + 1)); ++z) {
        for (int y = std::max(0, static_cast<int>(c[1] - r - 1)); y <= std::min(g.dims[1] - 1, static_cast<int>(c[1] + r + 1)); ++y) {
          for (int x = std::max(0, static_cast<int>(c[0] - r - 1)); x <= std::min(g.dims[0] - 1, static_cast<int>(c[0] + r + 1)); ++x) {
            const double dx = (x - c[0]) * g.spacing[0], dy = (y - c[1]) * g.spacing[1], dz = (z - c[2]) * g.spacing[2];
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            // Soft edge over one voxel.
            const double w = std::clamp(r + 0.5 - d, 0.0, 1.0);
            img[g.index(x, y, z)] += w * contrast;
          }
        }
      }
    }
    if (!placed) throw DataError("could not place a lesion inside the organ mask");
  }

  const std::vector<double> field = bias_field(g, spec.bias_field_strength, rng);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = center.scale * std::max(img[i], 0.0) * field[i] + center.shift + center.noise_sd * rng.normal();
    img[i] = std::max(v, 0.0);
  }
  return Volume(g, std::move(img));
}

}  // namespace

PhantomCase generate_case(const PhantomSpec& spec, std::size_t index) {
  validate(spec);
  if (index >= spec.total_cases()) throw InvalidArgument("case index beyond the study size");
  PhantomCase pc;
  pc.case_id = phantom_case_id(index);
  pc.label = phantom_label(spec, index);
  const PhantomCenter& center = spec.centers[index % spec.centers.size()];
  pc.center = center.name;

  Rng rng(derive_seed(spec.seed, index));
  Geometry g;
  g.dims = spec.dims;
  g.spacing = {spec.spacing_mm, spec.spacing_mm, spec.spacing_mm};

  // Organ geometry: semi-axes grow with class.
  Ellipsoid organ;
  const double growth = std::max(0.5, 1.0 + spec.volume_effect * pc.label + spec.volume_jitter * rng.normal());
  const std::array<double, 3> base{0.26, 0.15, 0.12};  // fractions of the field of view
  for (int a = 0; a < 3; ++a) {
    const double fov = spec.dims[a] * spec.spacing_mm;
    organ.axes[a] = std::min(base[a] * fov * growth * rng.uniform(0.93, 1.07), 0.4 * fov);
    organ.center[a] = 0.5 * (spec.dims[a] - 1) + rng.uniform(-0.05, 0.05) * spec.dims[a];
  }
  std::vector<std::uint8_t> mdata(g.voxel_count(), 0);
  for (int z = 0; z < g.dims[2]; ++z) {
    for (int y = 0; y < g.dims[1]; ++y) {
      for (int x = 0; x < g.dims[0]; ++x) {
        const double u = (x - organ.center[0]) * spec.spacing_mm / organ.axes[0];
        const double v = (y - organ.center[1]) * spec.spacing_mm / organ.axes[1];
        const double w = (z - organ.center[2]) * spec.spacing_mm / organ.axes[2];
        if (u * u + v * v + w * w <= 1.0) mdata[g.index(x, y, z)] = 1;
      }
    }
  }
  pc.mask = Mask(g, std::move(mdata));

  // Independent severity per contrast keeps T1 and T2 complementary.
  const double sev_t1 = pc.label + spec.severity_jitter * rng.normal();
  const double sev_t2 = pc.label + spec.severity_jitter * rng.normal();
  Rng rng_t1(derive_seed(derive_seed(spec.seed, index), 1));
  Rng rng_t2(derive_seed(derive_seed(spec.seed, index), 2));
  pc.t1 = render_contrast(spec, g, pc.mask, organ, {120.0, 260.0, 35.0, -90.0}, sev_t1, center, rng_t1);
  pc.t2 = render_contrast(spec, g, pc.mask, organ, {80.0, 180.0, 30.0, 110.0}, sev_t2, center, rng_t2);

  ClinicalRecord& rec = pc.clinical;
  rec.case_id = pc.case_id;
  rec.label = pc.label;
  set_mask_covariates(rec, pc.mask);
  rec.values[0] = rng.uniform() < 0.12 + 0.04 * pc.label ? 1.0 : 0.0;  // diabetes
  rec.values[4] = std::round(rng.normal(62.0, 9.0));                     // age
  rec.values[5] = rng.uniform() < 0.5 ? 1.0 : 0.0;                       // gender
  rec.values[6] = std::round(rng.normal(26.0, 4.0) * 10.0) / 10.0;       // bmi
  rec.values[7] = rng.uniform() < 0.05 ? 1.0 : 0.0;                      // chronic pancreatitis
  return pc;
}

StudyIndex generate_study(const PhantomSpec& spec, const std::filesystem::path& dir, int jobs) {
  validate(spec);
  const std::size_t n = spec.total_cases();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<ClinicalRecord> clinical(n);
  StudyIndex index;
  index.case_ids.resize(n);
  index.centers.resize(n);
  index.labels.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    PhantomCase pc = generate_case(spec, i);
    const auto case_dir = dir / pc.case_id;
    std::filesystem::create_directories(case_dir);
    save_nifti(pc.t1, case_dir / "t1.nii.gz");
    save_nifti(pc.t2, case_dir / "t2.nii.gz");
    save_nifti(pc.mask, case_dir / "mask.nii.gz");
    clinical[i] = pc.clinical;
    index.case_ids[i] = pc.case_id;
    index.centers[i] = pc.center;
    index.labels[i] = pc.label;
  });
  write_clinical_csv(clinical, dir / "clinical.csv");
  write_study_index(index, dir / "labels.csv");
  std::ofstream manifest(dir / "manifest.json", std::ios::binary);
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.json").string());
  manifest << to_json(spec) << '\n';
  return index;
}

StudyIndex read_study_index(const std::filesystem::path& labels_csv) {
  const csv::Table t = csv::read(labels_csv);
  const std::size_t ci = t.column("case_id"), ce = t.column("center"), la = t.column("label");
  StudyIndex s;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw FormatError(labels_csv.string() + ": ragged row");
    const int label = csv::parse_int(row[la], row[ci]);
    if (label < 0 || label > 2) throw DataError(labels_csv.string() + ": case " + row[ci] + " has label out of range");
    if (std::find(s.case_ids.begin(), s.case_ids.end(), row[ci]) != s.case_ids.end()) {
      throw DataError(labels_csv.string() + ": duplicate case " + row[ci]);
    }
    s.case_ids.push_back(row[ci]);
    s.centers.push_back(row[ce]);
    s.labels.push_back(label);
  }
  if (s.case_ids.empty()) throw DataError(labels_csv.string() + ": no cases");
  return s;
}

void write_study_index(const StudyIndex& index, const std::filesystem::path& labels_csv) {
  csv::Table t;
  t.header = {"case_id", "center", "label"};
  for (std::size_t i = 0; i < index.case_ids.size(); ++i) {
    t.rows.push_back({index.case_ids[i], index.centers[i], std::to_string(index.labels[i])});
  }
  csv::write(t, labels_csv);
}

DlProbabilities synthetic_dl_probabilities(const StudyIndex& study, std::uint64_t seed, double strength,
                                           double noise) {
  DlProbabilities dl;
  for (std::size_t i = 0; i < study.case_ids.size(); ++i) {
    Rng rng(derive_seed(seed ^ 0x5d1f0a3bULL, i));
    std::vector<double> z(3);
    for (int c = 0; c < 3; ++c) z[c] = (c == study.labels[i] ? strength : 0.0) + noise * rng.normal();
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : z) v /= sum;
    dl.case_ids.push_back(study.case_ids[i]);
    dl.probs.push_back(std::move(z));
  }
  return dl;
}

std::string to_json(const PhantomSpec& spec) {
  nlohmann::ordered_json j;
  j["cases_per_class"] = spec.cases_per_class;
  auto centers = nlohmann::ordered_json::array();
  for (const auto& c : spec.centers) {
    centers.push_back({{"name", c.name}, {"scale", c.scale}, {"shift", c.shift}, {"noise_sd", c.noise_sd}});
  }
  j["centers"] = centers;
  j["dims"] = spec.dims;
  j["spacing_mm"] = spec.spacing_mm;
  auto tex = nlohmann::ordered_json::array();
  for (const auto& t : spec.class_texture) {
    tex.push_back({{"correlation_mm", t.correlation_mm}, {"blob_rate", t.blob_rate}, {"blob_radius_mm", t.blob_radius_mm}});
  }
  j["class_texture"] = tex;
  j["severity_jitter"] = spec.severity_jitter;
  j["bias_field_strength"] = spec.bias_field_strength;
  j["volume_effect"] = spec.volume_effect;
  j["volume_jitter"] = spec.volume_jitter;
  j["seed"] = spec.seed;
  return j.dump(1);
}

PhantomSpec phantom_spec_from_json(std::string_view text) {
  PhantomSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("cases_per_class")) s.cases_per_class = j["cases_per_class"].get<std::array<int, 3>>();
    if (j.contains("centers")) {
      s.centers.clear();
      for (const auto& c : j["centers"]) {
        s.centers.push_back({c.at("name").get<std::string>(), c.value("scale", 1.0), c.value("shift", 0.0),
                             c.value("noise_sd", 2.0)});
      }
    }
    if (j.contains("dims")) s.dims = j["dims"].get<Dims>();
    s.spacing_mm = j.value("spacing_mm", s.spacing_mm);
    if (j.contains("class_texture")) {
      for (std::size_t c = 0; c < 3; ++c) {
        const auto& t = j["class_texture"].at(c);
        s.class_texture[c] = {t.at("correlation_mm").get<double>(), t.at("blob_rate").get<double>(),
                              t.at("blob_radius_mm").get<double>()};
      }
    }
    s.severity_jitter = j.value("severity_jitter", s.severity_jitter);
    s.bias_field_strength = j.value("bias_field_strength", s.bias_field_strength);
    s.volume_effect = j.value("volume_effect", s.volume_effect);
    s.volume_jitter = j.value("volume_jitter", s.volume_jitter);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid phantom spec JSON: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace ipmn
