#include "sharpmask/error.hpp"
#include "sharpmask/models.hpp"

namespace nn = torch::nn;

namespace sharpmask {

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int64_t in_channels,
                                               const DiscriminatorConfig& config)
    : in_channels_(in_channels), config_(config) {
  config_.validate();
  nn::Sequential body;
  int64_t channels = config_.base_channels;
  body->push_back(nn::Conv2d(nn::Conv2dOptions(in_channels, channels, 4).stride(2).padding(1)));
  body->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
  for (int64_t i = 1; i + 1 < config_.n_layers; ++i) {
    const int64_t next = config_.base_channels * (int64_t{1} << std::min<int64_t>(i, 3));
    body->push_back(nn::Conv2d(nn::Conv2dOptions(channels, next, 4).stride(2).padding(1)));
    body->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
    channels = next;
  }
  body->push_back(nn::Conv2d(nn::Conv2dOptions(channels, 1, 3).padding(1)));
  body_ = register_module("body", body);
}

torch::Tensor PatchDiscriminatorImpl::logits(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != in_channels_) {
    throw Error(ErrorKind::Shape, "discriminator: expected " + std::to_string(in_channels_) +
                                      " input channels");
  }
  return body_->forward(x);
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& x) {
  return kScoreEps + (1.0 - 2.0 * kScoreEps) * torch::sigmoid(logits(x));
}

PatchDiscriminator make_d1(const DiscriminatorConfig& config) {
  return PatchDiscriminator(2 * ImageBatch::kChannels, config);
}

PatchDiscriminator make_d2(const DiscriminatorConfig& config) {
  return PatchDiscriminator(ImageBatch::kChannels, config);
}

torch::Tensor d1_forward(PatchDiscriminator& d1, const torch::Tensor& fake,
                         const torch::Tensor& candidate) {
  if (fake.sizes() != candidate.sizes()) {
    throw Error(ErrorKind::Shape, "D1: fake and candidate differ in shape");
  }
  return d1->forward(torch::cat({fake, candidate}, 1));
}

}  // namespace sharpmask
