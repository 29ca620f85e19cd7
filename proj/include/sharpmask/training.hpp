#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/imaging.hpp"
#include "sharpmask/losses.hpp"
#include "sharpmask/models.hpp"

namespace sharpmask {

enum class Profile { Toy, Full };
/// Order of the two generators in the VEN forward path.
enum class VenOrder { G2ThenG1, G1ThenG2 };
/// SingleGan folds the VEN objective into FDN training (ablation).
enum class FdnMode { TwoStage, SingleGan };

std::string_view to_string(Profile p);
std::string_view to_string(VenOrder o);
std::string_view to_string(FdnMode m);

struct TrainConfig {
  double alpha = 100.0;
  double beta = 100.0;
  double learning_rate = 2e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  int64_t batch_size = 32;
  int64_t steps_fdn = 600;
  int64_t steps_ven = 200;
  int64_t d_steps_per_g = 1;
  uint64_t seed = 0;
  Profile profile = Profile::Toy;
  int64_t sample_every = 500;     // sample grid cadence, 0 disables
  int64_t freeze_check_every = 50;
  VenOrder ven_order = VenOrder::G2ThenG1;
  FdnMode fdn_mode = FdnMode::TwoStage;

  void validate() const;
};

struct GanModelConfig {
  G1Config g1;
  G2Config g2;
  DiscriminatorConfig d1;
  DiscriminatorConfig d2;
};

/// One line of the loss history.
struct StepRecord {
  int64_t step = 0;
  std::string stage;
  double gan_term = 0.0;
  double recon_term = 0.0;
  double total = 0.0;
  double d_loss = 0.0;
};

void to_json(nlohmann::json& j, const StepRecord& r);

/// Where a stage writes its artifacts; empty paths disable that output.
struct StageOutputs {
  std::filesystem::path checkpoint_dir;
  std::filesystem::path log_dir;
  std::filesystem::path sample_dir;
};

/// Norm over all gradients currently held by the parameters.
double gradient_norm(const std::vector<torch::Tensor>& params);

/// Stage 1: alternating D1 / G1 updates.
class FdnTrainer {
 public:
  FdnTrainer(const TrainConfig& config, const GanModelConfig& models, SharpenParams sharpen);

  /// One discriminator update (d_steps_per_g of them) then one generator update.
  StepRecord step(const ImageBatch& real, const ImageBatch& fake);

  GeneratorG1& g1() { return g1_; }
  PatchDiscriminator& d1() { return d1_; }
  int64_t steps_done() const { return steps_; }

  StageCheckpoint g1_checkpoint() const;
  StageCheckpoint d1_checkpoint() const;

 private:
  TrainConfig config_;
  GanModelConfig models_;
  SharpenParams sharpen_;
  GeneratorG1 g1_{nullptr};
  PatchDiscriminator d1_{nullptr};
  PatchDiscriminator d2_{nullptr};  // single-GAN ablation only
  std::unique_ptr<torch::optim::Adam> opt_g_;
  std::unique_ptr<torch::optim::Adam> opt_d_;
  std::unique_ptr<torch::optim::Adam> opt_d2_;
  int64_t steps_ = 0;
};

/// Stage 2: G1 restored from the FDN checkpoint and frozen; G2 and D2 train.
class VenTrainer {
 public:
  VenTrainer(const TrainConfig& config, const GanModelConfig& models, SharpenParams sharpen,
             const StageCheckpoint& fdn_g1);

  StepRecord step(const ImageBatch& fake);

  /// The VEN forward path on a raw tensor (gradients flow through G1).
  torch::Tensor compose(const torch::Tensor& fake);

  /// Gradient norm of G2's parameters after the last generator backward pass.
  double last_g2_grad_norm() const { return last_g2_grad_norm_; }

  const std::string& frozen_digest() const { return frozen_digest_; }

  /// Recomputes the G1 digest; throws ErrorKind::Contract if it moved.
  void verify_freeze() const;

  GeneratorG1& g1() { return g1_; }
  GeneratorG2& g2() { return g2_; }
  PatchDiscriminator& d2() { return d2_; }
  int64_t steps_done() const { return steps_; }

  StageCheckpoint g2_checkpoint() const;
  StageCheckpoint d2_checkpoint() const;

 private:
  TrainConfig config_;
  GanModelConfig models_;
  SharpenParams sharpen_;
  GeneratorG1 g1_{nullptr};
  GeneratorG2 g2_{nullptr};
  PatchDiscriminator d2_{nullptr};
  std::unique_ptr<torch::optim::Adam> opt_g_;
  std::unique_ptr<torch::optim::Adam> opt_d_;
  std::string frozen_digest_;
  double last_g2_grad_norm_ = 0.0;
  int64_t steps_ = 0;
};

struct FdnResult {
  StageCheckpoint g1;
  StageCheckpoint d1;
  std::vector<StepRecord> history;
};

struct VenResult {
  StageCheckpoint g2;
  StageCheckpoint d2;
  std::vector<StepRecord> history;
  std::string g1_digest;
};

FdnResult train_fdn(const TrainConfig& config, const GanModelConfig& models,
                    const Manifest& train, const SharpenParams& sharpen,
                    const StageOutputs& outputs = {});

VenResult train_ven(const TrainConfig& config, const GanModelConfig& models,
                    const Manifest& train, const SharpenParams& sharpen,
                    const StageCheckpoint& fdn_g1, const StageOutputs& outputs = {});

/// Loads the FDN_G1 checkpoint (digest and stage tag verified) first.
VenResult train_ven(const TrainConfig& config, const GanModelConfig& models,
                    const Manifest& train, const SharpenParams& sharpen,
                    const std::filesystem::path& fdn_g1_path, const StageOutputs& outputs = {});

void write_history(const std::filesystem::path& file, const std::vector<StepRecord>& history);

}  // namespace sharpmask
