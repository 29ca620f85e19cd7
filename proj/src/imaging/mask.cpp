#include <algorithm>
#include <cmath>

#include "sharpmask/error.hpp"
#include "sharpmask/imaging.hpp"

namespace sharpmask {

AdversarialMask extract_mask(const ImageBatch& base, const ImageBatch& composed,
                             MaskStage stage) {
  if (!base.same_shape(composed)) {
    throw Error(ErrorKind::Shape, "extract_mask: base and composed differ in shape");
  }
  return {composed.tensor().to(torch::kDouble) - base.tensor().to(torch::kDouble), stage};
}

ImageBatch apply_mask(const ImageBatch& base, const AdversarialMask& mask) {
  if (base.tensor().sizes() != mask.data.sizes()) {
    throw Error(ErrorKind::Shape, "apply_mask: base and mask differ in shape");
  }
  auto composed = base.tensor().to(torch::kDouble) + mask.data;
  return ImageBatch::from_tensor(composed.to(base.tensor().scalar_type()));
}

MaskVisualization visualize_mask(const AdversarialMask& mask) {
  const auto data = mask.data.to(torch::kDouble);
  if (!torch::isfinite(data).all().item<bool>()) {
    throw Error(ErrorKind::Validation, "visualize_mask: non-finite mask values");
  }
  const double lo = data.min().item<double>();
  const double hi = data.max().item<double>();
  torch::Tensor image;
  if (hi > lo) {
    image = ((data - lo) / (hi - lo)).clamp(0.0, 1.0);
  } else {
    image = torch::full_like(data, 0.5);
  }
  return {ImageBatch::from_tensor(image.to(torch::kFloat)), lo, hi};
}

torch::Tensor unvisualize_mask(const ImageBatch& image, double min, double max) {
  if (max > min) {
    return image.tensor().to(torch::kDouble) * (max - min) + min;
  }
  return torch::full(image.tensor().sizes(), min, torch::kDouble);
}

void to_json(nlohmann::json& j, const MaskStats& s) {
  j = nlohmann::json{{"mean_abs", s.mean_abs}, {"max_abs", s.max_abs}, {"min", s.min},
                     {"max", s.max}, {"rms", s.rms}};
}

MaskStats mask_stats(const AdversarialMask& mask) {
  const auto d = mask.data.to(torch::kDouble);
  MaskStats s;
  s.mean_abs = d.abs().mean().item<double>();
  s.max_abs = d.abs().max().item<double>();
  s.min = d.min().item<double>();
  s.max = d.max().item<double>();
  s.rms = std::sqrt(d.square().mean().item<double>());
  return s;
}

std::vector<int64_t> mask_magnitude_histogram(const AdversarialMask& mask, int bins,
                                              double upper) {
  if (bins < 1 || !(upper > 0.0)) {
    throw Error(ErrorKind::Validation, "mask histogram: need bins >= 1 and upper > 0");
  }
  std::vector<int64_t> counts(static_cast<size_t>(bins), 0);
  const auto d = mask.data.to(torch::kDouble).contiguous();
  const double* p = d.data_ptr<double>();
  for (int64_t i = 0; i < d.numel(); ++i) {
    const auto bin = static_cast<int64_t>(std::abs(p[i]) / upper * bins);
    counts[static_cast<size_t>(std::clamp<int64_t>(bin, 0, bins - 1))] += 1;
  }
  return counts;
}

}  // namespace sharpmask
