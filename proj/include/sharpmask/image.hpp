#pragma once

#include <cstdint>
#include <string_view>

#include <torch/torch.h>

namespace sharpmask {

/// A batch of square RGB images, B x 3 x H x W, every element in [0, 1].
///
/// The wrapped tensor is detached, contiguous and lives on the CPU. The
/// factory rejects anything that violates the range or shape contract, so
/// code that receives an ImageBatch never has to re-check it.
class ImageBatch {
 public:
  static constexpr int64_t kChannels = 3;

  static ImageBatch from_tensor(torch::Tensor data);

  /// Same as from_tensor but clamps into [0, 1] first. Non-finite values are
  /// still rejected.
  static ImageBatch from_tensor_clamped(torch::Tensor data);

  const torch::Tensor& tensor() const noexcept { return data_; }

  int64_t batch() const { return data_.size(0); }
  int64_t channels() const { return data_.size(1); }
  int64_t height() const { return data_.size(2); }
  int64_t width() const { return data_.size(3); }

  /// Image `index` as a batch of one.
  ImageBatch slice(int64_t index) const;

  bool same_shape(const ImageBatch& other) const {
    return data_.sizes() == other.data_.sizes();
  }

 private:
  explicit ImageBatch(torch::Tensor data) : data_(std::move(data)) {}

  torch::Tensor data_;
};

/// Concatenates batches along the batch axis. All inputs must share H x W.
ImageBatch concat(const std::vector<ImageBatch>& parts);

enum class MaskStage { Fdn, Ven };

std::string_view to_string(MaskStage stage);

/// Additive perturbation such that base + data reproduces the composed image.
/// Stored in double precision so that the round trip is exact for float32
/// images.
struct AdversarialMask {
  torch::Tensor data;
  MaskStage stage = MaskStage::Fdn;
};

}  // namespace sharpmask
