#include "sharpmask/attack.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>
#include <thread>

#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/models.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

void to_json(nlohmann::json& j, const AttackRun& run) {
  auto checkpoints = nlohmann::json::array();
  for (const auto& c : run.checkpoints) {
    checkpoints.push_back({{"path", c.path}, {"stage", c.stage}, {"digest", c.digest}});
  }
  auto records = nlohmann::json::array();
  for (const auto& r : run.records) {
    records.push_back({{"line", r.line}, {"id", r.id}, {"input", r.input}, {"image", r.image},
                       {"mask_raw", r.mask_raw}, {"mask_vis", r.mask_vis}, {"mask_stats", r.stats}});
  }
  j = {{"stage", run.stage},
       {"manifest_root", run.manifest_root},
       {"checkpoints", checkpoints},
       {"sharpen", run.sharpen},
       {"records", records},
       {"mask_magnitude_histogram",
        {{"upper", run.histogram_upper}, {"counts", run.magnitude_histogram}}},
       {"warnings", run.warnings}};
}

namespace {

using Transform = std::function<torch::Tensor(const torch::Tensor&)>;

// Runs `transform` over manifest lines [resume_from, N), sharded across
// workers; each worker writes its own files, records land in line order.
AttackRun run_attack(const Transform& transform, MaskStage stage, const Manifest& manifest,
                     const SharpenParams& sharpen, const AttackOptions& options) {
  if (options.batch_size < 1 || options.workers < 1) {
    throw Error(ErrorKind::Validation, "attack: batch_size and workers must be >= 1");
  }
  const std::string stage_dir(to_string(stage));
  AttackRun run;
  run.stage = stage_dir;
  run.manifest_root = manifest.root.generic_string();
  run.sharpen = sharpen;
  run.histogram_upper = options.histogram_upper;
  run.magnitude_histogram.assign(static_cast<size_t>(options.histogram_bins), 0);

  const size_t begin = std::min(options.resume_from, manifest.size());
  const size_t count = manifest.size() - begin;
  std::vector<std::optional<AttackRecord>> slots(count);
  std::mutex merge_mutex;
  std::vector<std::string> failures;

  auto work = [&](size_t lo, size_t hi) {
    torch::NoGradGuard no_grad;
    for (size_t start = lo; start < hi; start += static_cast<size_t>(options.batch_size)) {
      const size_t stop = std::min(hi, start + static_cast<size_t>(options.batch_size));
      std::vector<ImageBatch> inputs;
      std::vector<size_t> lines;
      for (size_t k = start; k < stop; ++k) {
        const size_t line = begin + k;
        try {
          inputs.push_back(load_image(manifest.fake_file(line), manifest.resolution));
          lines.push_back(line);
        } catch (const Error& e) {
          std::lock_guard lock(merge_mutex);
          failures.push_back(e.what());
        }
      }
      if (inputs.empty()) continue;
      const auto batch = concat(inputs);
      const auto output = ImageBatch::from_tensor_clamped(
          transform(batch.tensor()).to(batch.tensor().scalar_type()));

      std::vector<int64_t> local_hist(run.magnitude_histogram.size(), 0);
      for (size_t i = 0; i < lines.size(); ++i) {
        const size_t line = lines[i];
        const auto in = batch.slice(static_cast<int64_t>(i));
        const auto out = output.slice(static_cast<int64_t>(i));
        const auto mask = extract_mask(in, out, stage);

        AttackRecord rec;
        rec.line = line;
        rec.id = manifest.samples[line].fake_path.stem().string();
        rec.input = manifest.samples[line].fake_path.generic_string();
        rec.image = stage_dir + "/images/" + rec.id + ".png";
        rec.mask_raw = stage_dir + "/masks/" + rec.id + ".npy";
        rec.mask_vis = stage_dir + "/masks/" + rec.id + "_vis.png";
        rec.stats = mask_stats(mask);
        save_image(options.out_dir / rec.image, out);
        save_npy(options.out_dir / rec.mask_raw, mask.data);
        save_mask_visualization(options.out_dir / rec.mask_vis, visualize_mask(mask));
        const auto h = mask_magnitude_histogram(mask, options.histogram_bins, options.histogram_upper);
        for (size_t b = 0; b < h.size(); ++b) local_hist[b] += h[b];
        slots[line - begin] = std::move(rec);
      }
      std::lock_guard lock(merge_mutex);
      for (size_t b = 0; b < local_hist.size(); ++b) run.magnitude_histogram[b] += local_hist[b];
    }
  };

  const auto workers = static_cast<size_t>(std::max<int64_t>(1, options.workers));
  if (workers == 1 || count < 2) {
    work(0, count);
  } else {
    std::vector<std::thread> threads;
    const size_t per = (count + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
      const size_t lo = w * per;
      const size_t hi = std::min(count, lo + per);
      if (lo >= hi) break;
      threads.emplace_back(work, lo, hi);
    }
    for (auto& t : threads) t.join();
  }

  for (auto& slot : slots) {
    if (slot) run.records.push_back(std::move(*slot));
  }
  std::sort(failures.begin(), failures.end());
  for (const auto& f : failures) run.warnings.push_back("skipped: " + f);
  return run;
}

CheckpointRef ref_of(const fs::path& path, const StageCheckpoint& ckpt) {
  return {path.generic_string(), std::string(to_string(ckpt.stage)), ckpt.digest};
}

void merge_run_record(const fs::path& out_dir, const AttackRun& run) {
  const auto path = out_dir / "run.json";
  nlohmann::json doc = nlohmann::json::object();
  if (fs::exists(path)) doc = read_json_file(path);
  doc[run.stage] = run;
  write_json_file(path, doc);
}

}  // namespace

AttackRun attack_fdn(const fs::path& g1_checkpoint, const Manifest& manifest,
                     const SharpenParams& sharpen, const AttackOptions& options) {
  const auto ckpt = load_checkpoint(g1_checkpoint, StageTag::FdnG1);
  auto g1 = restore_g1(ckpt);
  auto run = run_attack([&](const torch::Tensor& x) { return g1->forward(x); }, MaskStage::Fdn,
                        manifest, sharpen, options);
  run.checkpoints.push_back(ref_of(g1_checkpoint, ckpt));
  merge_run_record(options.out_dir, run);
  return run;
}

AttackRun attack_ven(const fs::path& g2_checkpoint, const fs::path& g1_checkpoint,
                     const Manifest& manifest, const SharpenParams& sharpen,
                     const AttackOptions& options) {
  const auto g2_ckpt = load_checkpoint(g2_checkpoint, StageTag::VenG2);
  const auto g1_ckpt = load_checkpoint(g1_checkpoint, StageTag::FdnG1);
  std::vector<std::string> warnings;
  const auto trained_against = g2_ckpt.metadata.value("fdn_g1_digest", std::string());
  if (trained_against != g1_ckpt.digest) {
    const std::string msg = "G2 was trained against G1 " + trained_against.substr(0, 12) +
                            " but G1 " + g1_ckpt.digest.substr(0, 12) + " was supplied";
    if (!options.force) {
      throw Error(ErrorKind::Contract, "checkpoint mixing: " + msg + " (use --force to proceed)");
    }
    std::cerr << "warning: checkpoint mixing: " << msg << '\n';
    warnings.push_back("checkpoint mixing: " + msg);
  }
  auto g1 = restore_g1(g1_ckpt);
  auto g2 = restore_g2(g2_ckpt);
  const bool g2_first = g2_ckpt.metadata.value("ven_order", std::string("g2_g1")) == "g2_g1";
  auto run = run_attack(
      [&](const torch::Tensor& x) {
        return g2_first ? g1->forward(g2->forward(x)) : g2->forward(g1->forward(x));
      },
      MaskStage::Ven, manifest, sharpen, options);
  run.checkpoints.push_back(ref_of(g2_checkpoint, g2_ckpt));
  run.checkpoints.push_back(ref_of(g1_checkpoint, g1_ckpt));
  run.warnings.insert(run.warnings.begin(), warnings.begin(), warnings.end());
  merge_run_record(options.out_dir, run);
  return run;
}

}  // namespace sharpmask
