#include <map>

#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/report.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

namespace {

constexpr const char* kReferences[] = {"I_f", "I_fu"};

// id -> output image path for one stage of an attack run record.
std::map<std::string, fs::path> stage_outputs(const nlohmann::json& run, const std::string& stage,
                                              const fs::path& attack_dir) {
  std::map<std::string, fs::path> out;
  if (!run.contains(stage)) return out;
  for (const auto& rec : run.at(stage).at("records")) {
    out[rec.at("id").get<std::string>()] = attack_dir / rec.at("image").get<std::string>();
  }
  return out;
}

struct FamilySource {
  std::string key;
  bool lower_is_better = false;
  std::map<std::string, fs::path> files;  // empty for the in-memory families
};

}  // namespace

EvalReport evaluate(const Manifest& manifest, const EvaluateOptions& options) {
  if (options.batch_size < 1) throw Error(ErrorKind::Validation, "evaluate: batch_size must be >= 1");
  options.sharpen.validate();

  const FaceDetectorFn* face = nullptr;
  if (options.face_detector) {
    face = FaceDetectorRegistry::instance().find(*options.face_detector);
    if (face == nullptr) {
      throw Error(ErrorKind::Validation, "unknown face detector plug-in '" + *options.face_detector + "'");
    }
  }

  nlohmann::json run = nlohmann::json::object();
  if (!options.attack_dir.empty() && fs::exists(options.attack_dir / "run.json")) {
    run = read_json_file(options.attack_dir / "run.json");
  }
  std::vector<FamilySource> sources = {{"I_f", false, {}},
                                       {"I_fu", false, {}},
                                       {"I_s", true, stage_outputs(run, "fdn", options.attack_dir)},
                                       {"I_rs", true, stage_outputs(run, "ven", options.attack_dir)}};
  for (const auto& ext : options.external_methods) {
    FamilySource src{ext.name, true, {}};
    for (const auto& s : manifest.samples) {
      const auto id = s.fake_path.stem().string();
      const auto file = ext.dir / (id + ".png");
      if (fs::exists(file)) src.files[id] = file;
    }
    sources.push_back(std::move(src));
  }
  const size_t n_fam = sources.size();

  std::vector<std::unique_ptr<DetectorModel>> detectors;
  for (const auto& spec : options.detectors) {
    detectors.push_back(DetectorRegistry::instance().load(spec.name, spec.weights));
  }

  // Accumulators: labels[d][f], face hits per family, per-image quality scores.
  std::vector<std::vector<std::vector<Label>>> labels(detectors.size(),
                                                       std::vector<std::vector<Label>>(n_fam));
  std::vector<int64_t> face_hits(n_fam, 0);
  std::vector<int64_t> face_total(n_fam, 0);
  std::map<std::pair<size_t, size_t>, std::pair<std::vector<double>, std::vector<double>>> scores;

  const auto step = static_cast<size_t>(options.batch_size);
  for (size_t start = 0; start < manifest.size(); start += step) {
    const size_t stop = std::min(manifest.size(), start + step);
    // images[f][k]: image of family f for line start + k, if available.
    std::vector<std::vector<std::optional<ImageBatch>>> images(n_fam);
    for (size_t line = start; line < stop; ++line) {
      const auto id = manifest.samples[line].fake_path.stem().string();
      const auto fake = load_image(manifest.fake_file(line), manifest.resolution);
      images[0].push_back(fake);
      images[1].push_back(quantize_8bit(unsharp_mask(fake, options.sharpen)));
      for (size_t f = 2; f < n_fam; ++f) {
        auto it = sources[f].files.find(id);
        if (it == sources[f].files.end()) {
          images[f].push_back(std::nullopt);
        } else {
          images[f].push_back(load_image(it->second, manifest.resolution));
        }
      }
    }

    for (size_t f = 0; f < n_fam; ++f) {
      std::vector<ImageBatch> present;
      for (const auto& img : images[f]) {
        if (img) present.push_back(*img);
      }
      if (present.empty()) continue;
      const auto batch = concat(present);
      for (size_t d = 0; d < detectors.size(); ++d) {
        for (const auto& p : detector_predict(*detectors[d], batch)) labels[d][f].push_back(p.label);
      }
      if (face != nullptr) {
        for (int64_t i = 0; i < batch.batch(); ++i) face_hits[f] += (*face)(batch.slice(i)).detected;
        face_total[f] += batch.batch();
      }
    }

    for (size_t f = 1; f < n_fam; ++f) {
      for (size_t r = 0; r < 2; ++r) {
        if (f == r) continue;
        auto& [psnr_list, ssim_list] = scores[{f, r}];
        for (size_t k = 0; k < images[f].size(); ++k) {
          if (!images[f][k]) continue;
          psnr_list.push_back(psnr(*images[f][k], *images[r][k]).front());
          ssim_list.push_back(ssim(*images[f][k], *images[r][k]).front());
        }
      }
    }
  }

  EvalReport report;
  report.dataset = std::string(manifest.samples.empty() ? "unknown"
                                                        : to_string(manifest.samples.front().dataset_tag));
  report.metadata = options.metadata;
  report.metadata["n_frames"] = manifest.size();
  report.face_detector = options.face_detector;
  for (const auto& src : sources) report.families.push_back({src.key, src.lower_is_better});
  for (size_t d = 0; d < detectors.size(); ++d) {
    DetectorRow row{detectors[d]->name(), {}};
    for (size_t f = 0; f < n_fam; ++f) {
      row.cells.push_back({prediction_precision(labels[d][f]),
                           static_cast<int64_t>(labels[d][f].size())});
    }
    report.detectors.push_back(std::move(row));
  }
  for (size_t f = 1; f < n_fam; ++f) {
    std::optional<double> rate;
    if (face != nullptr && face_total[f] > 0) {
      rate = static_cast<double>(face_hits[f]) / static_cast<double>(face_total[f]);
    }
    for (size_t r = 0; r < 2; ++r) {
      if (f == r) continue;
      const auto& [psnr_list, ssim_list] = scores[{f, r}];
      report.quality.push_back({sources[f].key, kReferences[r], summarize_scores(psnr_list),
                                summarize_scores(ssim_list), rate});
    }
  }
  return report;
}

}  // namespace sharpmask
