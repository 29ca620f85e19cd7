#include <sstream>

#include "sharpmask/error.hpp"
#include "sharpmask/models.hpp"

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace sharpmask {

namespace {

int64_t stage_channels(int64_t base, int64_t level) {
  return base * (int64_t{1} << std::min<int64_t>(level, 3));
}

torch::Tensor lrelu(const torch::Tensor& x) { return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(0.2)); }

torch::ScalarType module_dtype(torch::nn::Module& m) {
  for (const auto& p : m.parameters()) return p.scalar_type();
  return torch::kFloat;
}

}  // namespace

void G1Config::validate() const {
  std::ostringstream bad;
  if (base_channels < 1) bad << " base_channels";
  if (depth < 1 || depth > 8) bad << " depth";
  if (input_channels != 3) bad << " input_channels";
  if (output_channels != 3) bad << " output_channels";
  if (!bad.str().empty()) throw Error(ErrorKind::Validation, "g1 config invalid:" + bad.str());
}

void G2Config::validate() const {
  std::ostringstream bad;
  if (base_channels < 1) bad << " base_channels";
  if (n_blocks < 0) bad << " n_blocks";
  if (patch_size < 1) bad << " patch_size";
  if (embed_dim < 1 || heads < 1 || embed_dim % heads != 0) bad << " embed_dim/heads";
  if (transformer_layers < 1) bad << " transformer_layers";
  if (mlp_ratio < 1) bad << " mlp_ratio";
  if (!bad.str().empty()) throw Error(ErrorKind::Validation, "g2 config invalid:" + bad.str());
}

void DiscriminatorConfig::validate() const {
  if (base_channels < 1 || n_layers < 2) {
    throw Error(ErrorKind::Validation, "discriminator config invalid: need base_channels >= 1, n_layers >= 2");
  }
}

void to_json(nlohmann::json& j, const G1Config& c) {
  j = {{"base_channels", c.base_channels}, {"depth", c.depth},
       {"input_channels", c.input_channels}, {"output_channels", c.output_channels}};
}
void from_json(const nlohmann::json& j, G1Config& c) {
  j.at("base_channels").get_to(c.base_channels);
  j.at("depth").get_to(c.depth);
  j.at("input_channels").get_to(c.input_channels);
  j.at("output_channels").get_to(c.output_channels);
}
void to_json(nlohmann::json& j, const G2Config& c) {
  j = {{"base_channels", c.base_channels}, {"n_blocks", c.n_blocks},
       {"patch_size", c.patch_size}, {"embed_dim", c.embed_dim},
       {"heads", c.heads}, {"transformer_layers", c.transformer_layers},
       {"mlp_ratio", c.mlp_ratio}};
}
void from_json(const nlohmann::json& j, G2Config& c) {
  j.at("base_channels").get_to(c.base_channels);
  j.at("n_blocks").get_to(c.n_blocks);
  j.at("patch_size").get_to(c.patch_size);
  j.at("embed_dim").get_to(c.embed_dim);
  j.at("heads").get_to(c.heads);
  j.at("transformer_layers").get_to(c.transformer_layers);
  j.at("mlp_ratio").get_to(c.mlp_ratio);
}
void to_json(nlohmann::json& j, const DiscriminatorConfig& c) {
  j = {{"base_channels", c.base_channels}, {"n_layers", c.n_layers}};
}
void from_json(const nlohmann::json& j, DiscriminatorConfig& c) {
  j.at("base_channels").get_to(c.base_channels);
  j.at("n_layers").get_to(c.n_layers);
}

void check_generator_input(const torch::Tensor& x, int64_t multiple, const char* who) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != x.size(3) || x.size(2) % multiple != 0) {
    std::ostringstream os;
    os << who << ": expected N x 3 x H x H with H divisible by " << multiple << ", got "
       << x.sizes();
    throw Error(ErrorKind::Shape, os.str());
  }
}

GeneratorG1Impl::GeneratorG1Impl(const G1Config& config) : config_(config) {
  config_.validate();
  const int64_t base = config_.base_channels;
  stem_ = register_module(
      "stem", nn::Conv2d(nn::Conv2dOptions(config_.input_channels, base, 3).padding(1)));
  for (int64_t i = 0; i < config_.depth; ++i) {
    const int64_t cin = stage_channels(base, i);
    const int64_t cout = stage_channels(base, i + 1);
    down_.push_back(register_module("down" + std::to_string(i),
                                    nn::Conv2d(nn::Conv2dOptions(cin, cout, 4).stride(2).padding(1))));
    up_.push_back(register_module("up" + std::to_string(i),
                                  nn::Conv2d(nn::Conv2dOptions(cout, cin, 3).padding(1))));
    merge_.push_back(register_module("merge" + std::to_string(i),
                                     nn::Conv2d(nn::Conv2dOptions(2 * cin, cin, 3).padding(1))));
  }
  head_ = register_module("head", nn::Conv2d(nn::Conv2dOptions(base, config_.output_channels, 1)));
}

torch::Tensor GeneratorG1Impl::forward(const torch::Tensor& x) {
  check_generator_input(x, int64_t{1} << config_.depth, "G1");
  std::vector<torch::Tensor> skips;
  auto h = lrelu(stem_->forward(x * 2.0 - 1.0));
  for (int64_t i = 0; i < config_.depth; ++i) {
    skips.push_back(h);
    h = lrelu(down_[static_cast<size_t>(i)]->forward(h));
  }
  for (int64_t i = config_.depth - 1; i >= 0; --i) {
    const auto k = static_cast<size_t>(i);
    h = F::interpolate(h, F::InterpolateFuncOptions()
                              .scale_factor(std::vector<double>{2.0, 2.0})
                              .mode(torch::kNearest));
    h = lrelu(up_[k]->forward(h));
    h = lrelu(merge_[k]->forward(torch::cat({h, skips[k]}, 1)));
  }
  return (torch::tanh(head_->forward(h)) + 1.0) * 0.5;
}

ImageBatch g1_forward(GeneratorG1& g1, const ImageBatch& fake) {
  torch::NoGradGuard no_grad;
  g1->eval();
  const auto x = fake.tensor().to(module_dtype(*g1));
  return ImageBatch::from_tensor_clamped(g1->forward(x).to(fake.tensor().scalar_type()));
}

ImageBatch g2_forward(GeneratorG2& g2, const ImageBatch& fake) {
  torch::NoGradGuard no_grad;
  g2->eval();
  const auto x = fake.tensor().to(module_dtype(*g2));
  return ImageBatch::from_tensor(g2->forward(x).to(fake.tensor().scalar_type()));
}

}  // namespace sharpmask
