#include <cmath>

#include "sharpmask/codec.hpp"
#include "sharpmask/detectors.hpp"
#include "sharpmask/error.hpp"

namespace sharpmask {

void to_json(nlohmann::json& j, const DetectorMetrics& m) {
  j = {{"accuracy", m.accuracy},
       {"precision", m.precision ? nlohmann::json(*m.precision) : nlohmann::json("N/A")},
       {"n_real", m.n_real},
       {"n_fake", m.n_fake}};
}

DetectorMetrics evaluate_detector(DetectorModel& detector, const Manifest& manifest,
                                  bool include_real, bool include_fake, int64_t batch_size) {
  DetectorMetrics m;
  int64_t correct = 0;
  int64_t fake_hits = 0;
  auto score = [&](bool fake_side) {
    for (size_t start = 0; start < manifest.size(); start += static_cast<size_t>(batch_size)) {
      const size_t stop = std::min(manifest.size(), start + static_cast<size_t>(batch_size));
      std::vector<ImageBatch> imgs;
      for (size_t i = start; i < stop; ++i) {
        imgs.push_back(load_image(fake_side ? manifest.fake_file(i) : manifest.real_file(i),
                                  manifest.resolution));
      }
      for (const auto& p : detector_predict(detector, concat(imgs))) {
        const bool said_fake = p.label == Label::Fake;
        if (fake_side) {
          ++m.n_fake;
          fake_hits += said_fake;
          correct += said_fake;
        } else {
          ++m.n_real;
          correct += !said_fake;
        }
      }
    }
  };
  if (!manifest.empty()) {
    if (include_real) score(false);
    if (include_fake) score(true);
  }
  const int64_t total = m.n_real + m.n_fake;
  m.accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  if (m.n_fake > 0) m.precision = static_cast<double>(fake_hits) / static_cast<double>(m.n_fake);
  return m;
}

DetectorTrainResult train_detector(const std::string& name, const DetectorTrainConfig& config,
                                   const Manifest& train, const Manifest& test) {
  if (config.steps < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorKind::Validation, "detector training: steps, batch_size, learning_rate must be positive");
  }
  torch::manual_seed(config.seed);
  ToyCnn net(config.architecture);
  torch::optim::Adam opt(net->parameters(), torch::optim::AdamOptions(config.learning_rate));
  BatchIterator batches(train, config.batch_size, config.seed + 7);

  DetectorTrainResult result;
  net->train();
  for (int64_t s = 0; s < config.steps; ++s) {
    const auto batch = batches.next_cycling();
    const auto x = torch::cat({batch.real.tensor(), batch.fake.tensor()}, 0);
    const auto y = torch::cat({torch::zeros({batch.real.batch()}), torch::ones({batch.fake.batch()})});
    opt.zero_grad();
    auto loss = torch::binary_cross_entropy_with_logits(net->forward(x), y);
    loss.backward();
    const double value = loss.item<double>();
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::Diverged, "detector '" + name + "': non-finite loss at step " +
                                           std::to_string(s));
    }
    opt.step();
    result.loss_history.push_back(value);
  }

  nlohmann::json meta = {{"name", name}, {"steps", config.steps}, {"seed", config.seed}};
  ToyCnnDetector detector(name, net);
  if (!test.empty()) {
    result.test_metrics = evaluate_detector(detector, test);
    meta["test_metrics"] = result.test_metrics;
  }
  result.checkpoint = capture_checkpoint(*net, StageTag::Detector, config.architecture, meta);
  return result;
}

}  // namespace sharpmask
