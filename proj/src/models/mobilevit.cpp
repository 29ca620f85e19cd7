#include <cmath>

#include "sharpmask/error.hpp"
#include "sharpmask/models.hpp"

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace sharpmask {

TransformerLayerImpl::TransformerLayerImpl(int64_t dim, int64_t heads, int64_t mlp_ratio)
    : heads_(heads) {
  norm_attn_ = register_module("norm_attn", nn::LayerNorm(nn::LayerNormOptions({dim})));
  qkv_ = register_module("qkv", nn::Linear(dim, 3 * dim));
  proj_ = register_module("proj", nn::Linear(dim, dim));
  norm_mlp_ = register_module("norm_mlp", nn::LayerNorm(nn::LayerNormOptions({dim})));
  fc1_ = register_module("fc1", nn::Linear(dim, dim * mlp_ratio));
  fc2_ = register_module("fc2", nn::Linear(dim * mlp_ratio, dim));
}

torch::Tensor TransformerLayerImpl::forward(const torch::Tensor& tokens) {
  const int64_t groups = tokens.size(0);
  const int64_t n = tokens.size(1);
  const int64_t dim = tokens.size(2);
  const int64_t head_dim = dim / heads_;

  auto qkv = qkv_->forward(norm_attn_->forward(tokens))
                 .reshape({groups, n, 3, heads_, head_dim})
                 .permute({2, 0, 3, 1, 4});
  auto q = qkv[0];
  auto k = qkv[1];
  auto v = qkv[2];
  auto mixed = at::scaled_dot_product_attention(q, k, v).transpose(1, 2).reshape({groups, n, dim});
  auto x = tokens + proj_->forward(mixed);
  return x + fc2_->forward(F::silu(fc1_->forward(norm_mlp_->forward(x))));
}

int64_t mobilevit_token_count(int64_t height, int64_t width, int64_t patch) {
  return ((height + patch - 1) / patch) * ((width + patch - 1) / patch);
}

MobileViTBlockImpl::MobileViTBlockImpl(int64_t channels, const G2Config& config)
    : patch_(config.patch_size) {
  local_ = register_module("local", nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)));
  to_embed_ = register_module("to_embed", nn::Conv2d(nn::Conv2dOptions(channels, config.embed_dim, 1)));
  for (int64_t i = 0; i < config.transformer_layers; ++i) {
    layers_.push_back(register_module("transformer" + std::to_string(i),
                                      TransformerLayer(config.embed_dim, config.heads, config.mlp_ratio)));
  }
  norm_ = register_module("norm", nn::LayerNorm(nn::LayerNormOptions({config.embed_dim})));
  from_embed_ = register_module("from_embed", nn::Conv2d(nn::Conv2dOptions(config.embed_dim, channels, 1)));
  fuse_ = register_module("fuse", nn::Conv2d(nn::Conv2dOptions(2 * channels, channels, 3).padding(1)));
}

torch::Tensor MobileViTBlockImpl::forward(const torch::Tensor& x) {
  const int64_t b = x.size(0);
  const int64_t h = x.size(2);
  const int64_t w = x.size(3);
  auto y = to_embed_->forward(F::silu(local_->forward(x)));
  const int64_t d = y.size(1);

  const int64_t pad_h = (patch_ - h % patch_) % patch_;
  const int64_t pad_w = (patch_ - w % patch_) % patch_;
  if (pad_h > 0 || pad_w > 0) {
    y = F::pad(y, F::PadFuncOptions({0, pad_w, 0, pad_h}).mode(torch::kReplicate));
  }
  const int64_t nh = (h + pad_h) / patch_;
  const int64_t nw = (w + pad_w) / patch_;
  last_tokens_ = nh * nw;

  // B x d x (nh p) x (nw p) -> (B p p) x (nh nw) x d: one attention group
  // per within-patch pixel offset, attending across patches.
  auto tokens = y.reshape({b, d, nh, patch_, nw, patch_})
                    .permute({0, 3, 5, 2, 4, 1})
                    .reshape({b * patch_ * patch_, nh * nw, d});
  for (auto& layer : layers_) tokens = layer->forward(tokens);
  tokens = norm_->forward(tokens);
  y = tokens.reshape({b, patch_, patch_, nh, nw, d})
          .permute({0, 5, 3, 1, 4, 2})
          .reshape({b, d, nh * patch_, nw * patch_});
  if (pad_h > 0 || pad_w > 0) {
    y = y.narrow(2, 0, h).narrow(3, 0, w);
  }
  y = F::silu(from_embed_->forward(y));
  return F::silu(fuse_->forward(torch::cat({x, y}, 1)));
}

GeneratorG2Impl::GeneratorG2Impl(const G2Config& config) : config_(config) {
  config_.validate();
  stem_ = register_module("stem", nn::Conv2d(nn::Conv2dOptions(3, config_.base_channels, 3).padding(1)));
  for (int64_t i = 0; i < config_.n_blocks; ++i) {
    blocks_.push_back(register_module("block" + std::to_string(i),
                                      MobileViTBlock(config_.base_channels, config_)));
  }
  head_ = register_module("head", nn::Conv2d(nn::Conv2dOptions(config_.base_channels, 3, 3).padding(1)));
  torch::NoGradGuard no_grad;
  head_->weight.zero_();
  head_->bias.zero_();
}

torch::Tensor GeneratorG2Impl::forward(const torch::Tensor& x) {
  check_generator_input(x, 1, "G2");
  auto h = F::silu(stem_->forward(x * 2.0 - 1.0));
  for (auto& block : blocks_) h = block->forward(h);
  return (x + head_->forward(h)).clamp(0.0, 1.0);
}

}  // namespace sharpmask
