#include <torch/script.h>

#include "sharpmask/detectors.hpp"
#include "sharpmask/error.hpp"

namespace nn = torch::nn;

namespace sharpmask {

std::string_view to_string(Label label) { return label == Label::Fake ? "FAKE" : "REAL"; }

std::vector<Prediction> detector_predict(DetectorModel& detector, const ImageBatch& images,
                                         double threshold) {
  const auto probs = detector.probability_fake(images);
  std::vector<Prediction> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back({p >= threshold ? Label::Fake : Label::Real, p});
  return out;
}

void to_json(nlohmann::json& j, const ToyCnnConfig& c) { j = {{"base_channels", c.base_channels}}; }
void from_json(const nlohmann::json& j, ToyCnnConfig& c) { j.at("base_channels").get_to(c.base_channels); }

ToyCnnImpl::ToyCnnImpl(const ToyCnnConfig& config) : config_(config) {
  const int64_t c = config_.base_channels;
  if (c < 1) throw Error(ErrorKind::Validation, "toy cnn: base_channels must be >= 1");
  auto act = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); };
  features_ = register_module(
      "features",
      nn::Sequential(nn::Conv2d(nn::Conv2dOptions(3, c, 3).padding(1)), act(),
                     nn::Conv2d(nn::Conv2dOptions(c, 2 * c, 3).stride(2).padding(1)), act(),
                     nn::Conv2d(nn::Conv2dOptions(2 * c, 4 * c, 3).stride(2).padding(1)), act(),
                     nn::Conv2d(nn::Conv2dOptions(4 * c, 4 * c, 3).stride(2).padding(1)), act()));
  classifier_ = register_module("classifier", nn::Linear(4 * c, 1));
}

torch::Tensor ToyCnnImpl::forward(const torch::Tensor& x) {
  auto h = features_->forward(x * 2.0 - 1.0).mean({2, 3});
  return classifier_->forward(h).squeeze(1);
}

std::vector<double> ToyCnnDetector::probability_fake(const ImageBatch& images) {
  torch::NoGradGuard no_grad;
  net_->eval();
  const auto p = torch::sigmoid(net_->forward(images.tensor().to(torch::kFloat))).to(torch::kDouble).contiguous();
  return {p.data_ptr<double>(), p.data_ptr<double>() + p.numel()};
}

TorchScriptDetector::TorchScriptDetector(std::string name, const std::filesystem::path& weights)
    : name_(std::move(name)) {
  try {
    module_ = std::make_shared<torch::jit::Module>(torch::jit::load(weights.string()));
  } catch (const c10::Error& e) {
    throw Error(ErrorKind::Io, "detector '" + name_ + "': cannot load TorchScript weights " +
                                   weights.string());
  }
  module_->eval();
}

std::vector<double> TorchScriptDetector::probability_fake(const ImageBatch& images) {
  torch::NoGradGuard no_grad;
  auto out = module_->forward({images.tensor().to(torch::kFloat)}).toTensor().to(torch::kDouble);
  const int64_t n = images.batch();
  torch::Tensor prob;
  if (out.dim() == 2 && out.size(0) == n && out.size(1) == 2) {
    prob = torch::softmax(out, 1).select(1, 1);
  } else if (out.numel() == n) {
    prob = torch::sigmoid(out.reshape({n}));
  } else {
    throw Error(ErrorKind::Shape, "detector '" + name_ + "': unexpected output shape");
  }
  prob = prob.contiguous();
  return {prob.data_ptr<double>(), prob.data_ptr<double>() + n};
}

DetectorRegistry::DetectorRegistry() {
  kinds_["toy_cnn"] = DetectorKind::BuiltinToyCnn;
  for (const char* external : {"resnet50", "densenet121", "efficientnet", "mobilenet",
                               "shufflenet", "convnext", "efficientnet_sbis"}) {
    kinds_[external] = DetectorKind::TorchScript;
  }
}

const DetectorRegistry& DetectorRegistry::instance() {
  static const DetectorRegistry registry;
  return registry;
}

std::optional<DetectorKind> DetectorRegistry::find(const std::string& name) const {
  auto it = kinds_.find(name);
  if (it == kinds_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> DetectorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : kinds_) out.push_back(name);
  return out;
}

std::unique_ptr<DetectorModel> DetectorRegistry::load(const std::string& name,
                                                      const std::filesystem::path& weights) const {
  const auto kind = find(name);
  if (!kind) throw Error(ErrorKind::Validation, "unknown detector '" + name + "'");
  if (*kind == DetectorKind::TorchScript) {
    return std::make_unique<TorchScriptDetector>(name, weights);
  }
  const auto ckpt = load_checkpoint(weights, StageTag::Detector);
  ToyCnn net(ckpt.architecture.get<ToyCnnConfig>());
  restore_checkpoint(*net, ckpt);
  return std::make_unique<ToyCnnDetector>(name, std::move(net));
}

}  // namespace sharpmask
