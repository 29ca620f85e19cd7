#include "sharpmask/metrics.hpp"

namespace sharpmask {

FaceDetection variance_stub_detect(const ImageBatch& image) {
  const double var = image.tensor().to(torch::kDouble).mean(1).var(false).item<double>();
  return {var > kVarianceStubFloor, var};
}

FaceDetectorRegistry::FaceDetectorRegistry() { plugins_["variance_stub"] = variance_stub_detect; }

FaceDetectorRegistry& FaceDetectorRegistry::instance() {
  static FaceDetectorRegistry registry;
  return registry;
}

void FaceDetectorRegistry::add(const std::string& name, FaceDetectorFn fn) {
  plugins_[name] = std::move(fn);
}

const FaceDetectorFn* FaceDetectorRegistry::find(const std::string& name) const {
  auto it = plugins_.find(name);
  return it == plugins_.end() ? nullptr : &it->second;
}

std::vector<std::string> FaceDetectorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : plugins_) out.push_back(name);
  return out;
}

std::optional<double> face_detection_rate(const std::vector<ImageBatch>& images,
                                          const FaceDetectorFn* plugin) {
  if (plugin == nullptr || images.empty()) return std::nullopt;
  int64_t hits = 0;
  int64_t total = 0;
  for (const auto& batch : images) {
    for (int64_t i = 0; i < batch.batch(); ++i) {
      hits += (*plugin)(batch.slice(i)).detected;
      ++total;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace sharpmask
