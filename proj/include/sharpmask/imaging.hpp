#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpmask/image.hpp"

namespace sharpmask {

/// Unsharp-Mask configuration.
struct SharpenParams {
  double sigma = 1.0;      // Gaussian std-dev in pixels, > 0
  double amount = 0.8;     // detail boost, >= 0
  double threshold = 0.0;  // |detail| below this is left untouched, in [0, 1]

  void validate() const;
};

void to_json(nlohmann::json& j, const SharpenParams& p);
void from_json(const nlohmann::json& j, SharpenParams& p);

/// Normalized 1-D Gaussian taps for offsets -r..r with r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Index into [0, n) with reflect padding (edge sample not repeated).
int64_t reflect_index(int64_t i, int64_t n);

/// Separable Gaussian blur with reflect padding, per channel.
ImageBatch gaussian_blur(const ImageBatch& img, double sigma);

/// clamp(img + amount * masked(img - blur(img)), 0, 1).
ImageBatch unsharp_mask(const ImageBatch& img, const SharpenParams& params);

/// mask = composed - base. Throws on shape mismatch.
AdversarialMask extract_mask(const ImageBatch& base, const ImageBatch& composed,
                             MaskStage stage);

/// base + mask, the inverse of extract_mask.
ImageBatch apply_mask(const ImageBatch& base, const AdversarialMask& mask);

struct MaskVisualization {
  ImageBatch image;
  double min = 0.0;
  double max = 0.0;
};

/// Affine rescale of the mask from [min, max] to [0, 1]; a constant mask
/// renders as mid-gray.
MaskVisualization visualize_mask(const AdversarialMask& mask);

/// Inverse of visualize_mask given the recorded scale factors.
torch::Tensor unvisualize_mask(const ImageBatch& image, double min, double max);

struct MaskStats {
  double mean_abs = 0.0;
  double max_abs = 0.0;
  double min = 0.0;
  double max = 0.0;
  double rms = 0.0;
};

void to_json(nlohmann::json& j, const MaskStats& s);

MaskStats mask_stats(const AdversarialMask& mask);

/// Histogram of per-element |m| over `bins` equal bins spanning [0, upper].
/// Values above `upper` land in the last bin.
std::vector<int64_t> mask_magnitude_histogram(const AdversarialMask& mask,
                                              int bins, double upper);

}  // namespace sharpmask
