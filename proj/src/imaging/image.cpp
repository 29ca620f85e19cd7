#include "sharpmask/image.hpp"

#include <sstream>

#include "sharpmask/error.hpp"

namespace sharpmask {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Diverged: return "diverged";
  }
  return "unknown";
}

std::string_view to_string(MaskStage stage) {
  return stage == MaskStage::Fdn ? "fdn" : "ven";
}

namespace {

torch::Tensor check_shape(torch::Tensor data) {
  if (!data.defined()) {
    throw Error(ErrorKind::Validation, "image batch: undefined tensor");
  }
  if (!data.is_floating_point()) {
    throw Error(ErrorKind::Validation, "image batch: expected a floating-point tensor");
  }
  if (data.dim() != 4 || data.size(0) < 1 || data.size(1) != ImageBatch::kChannels ||
      data.size(2) != data.size(3) || data.size(2) < 1) {
    std::ostringstream os;
    os << "image batch: expected B x 3 x H x W with H == W and B >= 1, got " << data.sizes();
    throw Error(ErrorKind::Shape, os.str());
  }
  data = data.detach().to(torch::kCPU).contiguous();
  if (!torch::isfinite(data).all().item<bool>()) {
    throw Error(ErrorKind::Validation, "image batch: non-finite values");
  }
  return data;
}

}  // namespace

ImageBatch ImageBatch::from_tensor(torch::Tensor data) {
  data = check_shape(std::move(data));
  if (data.min().item<double>() < 0.0 || data.max().item<double>() > 1.0) {
    throw Error(ErrorKind::Validation, "image batch: values outside [0, 1]");
  }
  return ImageBatch(std::move(data));
}

ImageBatch ImageBatch::from_tensor_clamped(torch::Tensor data) {
  data = check_shape(std::move(data));
  return ImageBatch(data.clamp(0.0, 1.0).contiguous());
}

ImageBatch ImageBatch::slice(int64_t index) const {
  if (index < 0 || index >= batch()) {
    throw Error(ErrorKind::Shape, "image batch: slice index out of range");
  }
  return ImageBatch(data_.narrow(0, index, 1).contiguous());
}

ImageBatch concat(const std::vector<ImageBatch>& parts) {
  if (parts.empty()) {
    throw Error(ErrorKind::Shape, "concat: no images");
  }
  std::vector<torch::Tensor> tensors;
  tensors.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.height() != parts.front().height()) {
      throw Error(ErrorKind::Shape, "concat: mismatched image sizes");
    }
    tensors.push_back(p.tensor().to(parts.front().tensor().scalar_type()));
  }
  return ImageBatch::from_tensor(torch::cat(tensors, 0));
}

}  // namespace sharpmask
