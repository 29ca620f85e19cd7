#include <cstdio>
#include <fstream>

#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/training.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

void write_history(const fs::path& file, const std::vector<StepRecord>& history) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + file.string());
  for (const auto& r : history) out << nlohmann::json(r).dump() << '\n';
}

namespace {

constexpr int64_t kSampleRows = 4;

std::string step_name(const char* stage, int64_t step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s_step%06lld.png", stage, static_cast<long long>(step));
  return buf;
}

// Rows of [input, output, mask visualization] for the first few images.
void write_sample_grid(const fs::path& path, const ImageBatch& input, const ImageBatch& output,
                       MaskStage stage) {
  std::vector<std::vector<ImageBatch>> rows;
  for (int64_t i = 0; i < std::min(kSampleRows, input.batch()); ++i) {
    const auto in = input.slice(i);
    const auto out = output.slice(i);
    const auto vis = visualize_mask(extract_mask(in, out, stage));
    rows.push_back({in, out, vis.image});
  }
  save_image_grid(path, rows);
}

bool due(int64_t every, int64_t step, int64_t last) {
  return every > 0 && (step % every == 0 || step == last);
}

}  // namespace

FdnResult train_fdn(const TrainConfig& config, const GanModelConfig& models,
                    const Manifest& train, const SharpenParams& sharpen,
                    const StageOutputs& outputs) {
  FdnTrainer trainer(config, models, sharpen);
  BatchIterator batches(train, config.batch_size, config.seed);
  FdnResult result;
  for (int64_t s = 0; s < config.steps_fdn; ++s) {
    const auto batch = batches.next_cycling();
    result.history.push_back(trainer.step(batch.real, batch.fake));
    if (!outputs.sample_dir.empty() && due(config.sample_every, s + 1, config.steps_fdn)) {
      const auto i_s = g1_forward(trainer.g1(), batch.fake);
      write_sample_grid(outputs.sample_dir / step_name("fdn", s + 1), batch.fake, i_s,
                        MaskStage::Fdn);
    }
  }
  result.g1 = trainer.g1_checkpoint();
  result.d1 = trainer.d1_checkpoint();
  if (!outputs.checkpoint_dir.empty()) {
    save_checkpoint(outputs.checkpoint_dir / "fdn_g1.ckpt", result.g1);
    save_checkpoint(outputs.checkpoint_dir / "fdn_d1.ckpt", result.d1);
  }
  if (!outputs.log_dir.empty()) write_history(outputs.log_dir / "fdn_loss.jsonl", result.history);
  return result;
}

VenResult train_ven(const TrainConfig& config, const GanModelConfig& models,
                    const Manifest& train, const SharpenParams& sharpen,
                    const StageCheckpoint& fdn_g1, const StageOutputs& outputs) {
  VenTrainer trainer(config, models, sharpen, fdn_g1);
  BatchIterator batches(train, config.batch_size, config.seed + 1);
  VenResult result;
  result.g1_digest = trainer.frozen_digest();
  for (int64_t s = 0; s < config.steps_ven; ++s) {
    const auto batch = batches.next_cycling();
    result.history.push_back(trainer.step(batch.fake));
    if (!outputs.sample_dir.empty() && due(config.sample_every, s + 1, config.steps_ven)) {
      torch::NoGradGuard no_grad;
      trainer.g2()->eval();
      const auto i_rs = ImageBatch::from_tensor_clamped(trainer.compose(batch.fake.tensor()));
      write_sample_grid(outputs.sample_dir / step_name("ven", s + 1), batch.fake, i_rs,
                        MaskStage::Ven);
    }
  }
  trainer.verify_freeze();
  result.g2 = trainer.g2_checkpoint();
  result.d2 = trainer.d2_checkpoint();
  if (!outputs.checkpoint_dir.empty()) {
    save_checkpoint(outputs.checkpoint_dir / "ven_g2.ckpt", result.g2);
    save_checkpoint(outputs.checkpoint_dir / "ven_d2.ckpt", result.d2);
  }
  if (!outputs.log_dir.empty()) write_history(outputs.log_dir / "ven_loss.jsonl", result.history);
  return result;
}

VenResult train_ven(const TrainConfig& config, const GanModelConfig& models,
                    const Manifest& train, const SharpenParams& sharpen,
                    const fs::path& fdn_g1_path, const StageOutputs& outputs) {
  return train_ven(config, models, train, sharpen, load_checkpoint(fdn_g1_path, StageTag::FdnG1),
                   outputs);
}

}  // namespace sharpmask
