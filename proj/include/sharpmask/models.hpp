#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/image.hpp"

namespace sharpmask {

struct G1Config {
  int64_t base_channels = 16;
  int64_t depth = 2;
  int64_t input_channels = 3;
  int64_t output_channels = 3;

  void validate() const;
};

struct G2Config {
  int64_t base_channels = 16;
  int64_t n_blocks = 1;
  int64_t patch_size = 2;
  int64_t embed_dim = 32;
  int64_t heads = 4;
  int64_t transformer_layers = 2;
  int64_t mlp_ratio = 2;

  void validate() const;
};

struct DiscriminatorConfig {
  int64_t base_channels = 16;
  int64_t n_layers = 3;

  void validate() const;
};

void to_json(nlohmann::json& j, const G1Config& c);
void from_json(const nlohmann::json& j, G1Config& c);
void to_json(nlohmann::json& j, const G2Config& c);
void from_json(const nlohmann::json& j, G2Config& c);
void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);

/// U-Net encoder-decoder: full-resolution stem, `depth` stride-2 stages,
/// nearest-upsample decoder with skip concatenation, (tanh + 1) / 2 output.
class GeneratorG1Impl : public torch::nn::Module {
 public:
  explicit GeneratorG1Impl(const G1Config& config);

  /// x in [0, 1], N x 3 x H x W with H divisible by 2^depth.
  torch::Tensor forward(const torch::Tensor& x);

  const G1Config& config() const { return config_; }

 private:
  G1Config config_;
  torch::nn::Conv2d stem_{nullptr};
  std::vector<torch::nn::Conv2d> down_;
  std::vector<torch::nn::Conv2d> up_;
  std::vector<torch::nn::Conv2d> merge_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(GeneratorG1);

/// Multi-head self-attention + MLP, pre-norm, over token sequences.
class TransformerLayerImpl : public torch::nn::Module {
 public:
  TransformerLayerImpl(int64_t dim, int64_t heads, int64_t mlp_ratio);
  torch::Tensor forward(const torch::Tensor& tokens);  // G x N x D

 private:
  int64_t heads_;
  torch::nn::LayerNorm norm_attn_{nullptr};
  torch::nn::Linear qkv_{nullptr};
  torch::nn::Linear proj_{nullptr};
  torch::nn::LayerNorm norm_mlp_{nullptr};
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(TransformerLayer);

/// Number of patch tokens one attention group sees for an H x W map.
int64_t mobilevit_token_count(int64_t height, int64_t width, int64_t patch);

/// Local 3x3 conv -> 1x1 projection -> patch unfold -> transformer layers ->
/// fold -> 1x1 projection -> 3x3 fusion over [input, global features].
class MobileViTBlockImpl : public torch::nn::Module {
 public:
  MobileViTBlockImpl(int64_t channels, const G2Config& config);
  torch::Tensor forward(const torch::Tensor& x);

  /// Tokens per attention group seen in the last forward call.
  int64_t last_token_count() const { return last_tokens_; }

 private:
  int64_t patch_;
  int64_t last_tokens_ = 0;
  torch::nn::Conv2d local_{nullptr};
  torch::nn::Conv2d to_embed_{nullptr};
  std::vector<TransformerLayer> layers_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Conv2d from_embed_{nullptr};
  torch::nn::Conv2d fuse_{nullptr};
};
TORCH_MODULE(MobileViTBlock);

/// Pre-processor in front of the frozen G1: stem, MobileViT blocks, and a
/// zero-initialized residual head, so a fresh G2 is the identity map.
class GeneratorG2Impl : public torch::nn::Module {
 public:
  explicit GeneratorG2Impl(const G2Config& config);
  torch::Tensor forward(const torch::Tensor& x);

  const G2Config& config() const { return config_; }
  const std::vector<MobileViTBlock>& blocks() const { return blocks_; }

 private:
  G2Config config_;
  torch::nn::Conv2d stem_{nullptr};
  std::vector<MobileViTBlock> blocks_;
  torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(GeneratorG2);

/// Lower bound of the discriminator's score squashing; scores live in
/// [kScoreEps, 1 - kScoreEps].
inline constexpr double kScoreEps = 1e-7;

/// Patch-level convolutional classifier; emits one score per receptive field.
class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  PatchDiscriminatorImpl(int64_t in_channels, const DiscriminatorConfig& config);

  torch::Tensor logits(const torch::Tensor& x);
  /// Scores strictly inside (0, 1).
  torch::Tensor forward(const torch::Tensor& x);

  int64_t in_channels() const { return in_channels_; }
  const DiscriminatorConfig& config() const { return config_; }

 private:
  int64_t in_channels_;
  DiscriminatorConfig config_;
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

/// D1 takes [fake, candidate] concatenated on channels; D2 takes images only.
PatchDiscriminator make_d1(const DiscriminatorConfig& config);
PatchDiscriminator make_d2(const DiscriminatorConfig& config);

/// Inference-mode forward passes on ImageBatch values.
ImageBatch g1_forward(GeneratorG1& g1, const ImageBatch& fake);
ImageBatch g2_forward(GeneratorG2& g2, const ImageBatch& fake);

/// Channel concatenation (fake first) followed by D1; tensors may carry grad.
torch::Tensor d1_forward(PatchDiscriminator& d1, const torch::Tensor& fake,
                         const torch::Tensor& candidate);

/// Rebuild generators (architecture + weights) from their stage checkpoints.
GeneratorG1 restore_g1(const StageCheckpoint& checkpoint);
GeneratorG2 restore_g2(const StageCheckpoint& checkpoint);

/// Checks the input is B x 3 x H x W with H divisible by `multiple`.
void check_generator_input(const torch::Tensor& x, int64_t multiple, const char* who);

}  // namespace sharpmask
