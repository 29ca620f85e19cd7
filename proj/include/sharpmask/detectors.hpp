#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/image.hpp"

namespace torch::jit {
struct Module;
}

namespace sharpmask {

enum class Label { Real, Fake };

std::string_view to_string(Label label);

struct Prediction {
  Label label = Label::Real;
  double probability_fake = 0.0;
};

/// Black-box real/fake classifier: images in, probability-of-fake out.
class DetectorModel {
 public:
  virtual ~DetectorModel() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> probability_fake(const ImageBatch& images) = 0;
};

/// FAKE iff probability >= threshold.
std::vector<Prediction> detector_predict(DetectorModel& detector, const ImageBatch& images,
                                         double threshold = 0.5);

struct ToyCnnConfig {
  int64_t base_channels = 16;
};

void to_json(nlohmann::json& j, const ToyCnnConfig& c);
void from_json(const nlohmann::json& j, ToyCnnConfig& c);

/// Four 3x3 conv layers (three of them stride 2), global average pool,
/// linear logit.
class ToyCnnImpl : public torch::nn::Module {
 public:
  explicit ToyCnnImpl(const ToyCnnConfig& config);
  torch::Tensor forward(const torch::Tensor& x);  // N logits of the fake class

  const ToyCnnConfig& config() const { return config_; }

 private:
  ToyCnnConfig config_;
  torch::nn::Sequential features_{nullptr};
  torch::nn::Linear classifier_{nullptr};
};
TORCH_MODULE(ToyCnn);

class ToyCnnDetector : public DetectorModel {
 public:
  ToyCnnDetector(std::string name, ToyCnn net) : name_(std::move(name)), net_(std::move(net)) {}
  std::string name() const override { return name_; }
  std::vector<double> probability_fake(const ImageBatch& images) override;
  ToyCnn& net() { return net_; }

 private:
  std::string name_;
  ToyCnn net_;
};

/// User-supplied TorchScript module. forward(x) with x in [0, 1],
/// N x 3 x H x W float, must return N (or N x 1) fake-class logits or N x 2
/// class logits with the fake class second.
class TorchScriptDetector : public DetectorModel {
 public:
  TorchScriptDetector(std::string name, const std::filesystem::path& weights);
  std::string name() const override { return name_; }
  std::vector<double> probability_fake(const ImageBatch& images) override;

 private:
  std::string name_;
  std::shared_ptr<torch::jit::Module> module_;
};

enum class DetectorKind { BuiltinToyCnn, TorchScript };

/// Name -> architecture kind. Ships the built-in toy CNN plus the named
/// external architectures, which resolve to user-supplied TorchScript weights.
class DetectorRegistry {
 public:
  static const DetectorRegistry& instance();

  std::optional<DetectorKind> find(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Builds a detector. Built-ins take a DETECTOR checkpoint, external
  /// architectures a TorchScript file.
  std::unique_ptr<DetectorModel> load(const std::string& name,
                                      const std::filesystem::path& weights) const;

 private:
  DetectorRegistry();
  std::map<std::string, DetectorKind> kinds_;
};

struct DetectorTrainConfig {
  int64_t steps = 600;
  int64_t batch_size = 32;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
  ToyCnnConfig architecture;
};

struct DetectorMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;  // fraction of fakes predicted fake; nullopt with no fakes
  int64_t n_real = 0;
  int64_t n_fake = 0;
};

void to_json(nlohmann::json& j, const DetectorMetrics& m);

struct DetectorTrainResult {
  StageCheckpoint checkpoint;
  DetectorMetrics test_metrics;
  std::vector<double> loss_history;
};

/// Accuracy/precision over every real and fake frame of the manifest.
/// `include_real = false` scores only fakes, `include_fake = false` only reals.
DetectorMetrics evaluate_detector(DetectorModel& detector, const Manifest& manifest,
                                  bool include_real = true, bool include_fake = true,
                                  int64_t batch_size = 64);

/// Supervised binary training on aligned (real, fake) pairs.
DetectorTrainResult train_detector(const std::string& name, const DetectorTrainConfig& config,
                                   const Manifest& train, const Manifest& test);

}  // namespace sharpmask
