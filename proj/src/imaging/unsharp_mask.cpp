#include <cmath>
#include <sstream>

#include "sharpmask/error.hpp"
#include "sharpmask/imaging.hpp"

namespace sharpmask {

void SharpenParams::validate() const {
  std::ostringstream bad;
  if (!(std::isfinite(sigma) && sigma > 0.0)) bad << " sigma=" << sigma;
  if (!(std::isfinite(amount) && amount >= 0.0)) bad << " amount=" << amount;
  if (!(std::isfinite(threshold) && threshold >= 0.0 && threshold <= 1.0)) {
    bad << " threshold=" << threshold;
  }
  if (!bad.str().empty()) {
    throw Error(ErrorKind::Validation, "sharpen params out of range:" + bad.str());
  }
}

void to_json(nlohmann::json& j, const SharpenParams& p) {
  j = nlohmann::json{{"sigma", p.sigma}, {"amount", p.amount}, {"threshold", p.threshold}};
}

void from_json(const nlohmann::json& j, SharpenParams& p) {
  j.at("sigma").get_to(p.sigma);
  j.at("amount").get_to(p.amount);
  j.at("threshold").get_to(p.threshold);
}

std::vector<double> gaussian_kernel(double sigma) {
  const auto radius = static_cast<int64_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int64_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    taps[static_cast<size_t>(k + radius)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace {

// Blurs every H x W plane of a contiguous double tensor; rows then columns.
// Taps are applied to differences from the center sample, which equals the
// plain weighted sum because the taps sum to one, and leaves constant
// regions exactly unchanged.
torch::Tensor blur_planes(const torch::Tensor& src, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const auto radius = static_cast<int64_t>(taps.size() / 2);
  const int64_t planes = src.size(0) * src.size(1);
  const int64_t h = src.size(2);
  const int64_t w = src.size(3);

  auto tmp = torch::empty_like(src);
  auto out = torch::empty_like(src);
  const double* in = src.data_ptr<double>();
  double* mid = tmp.data_ptr<double>();
  double* dst = out.data_ptr<double>();

  for (int64_t p = 0; p < planes; ++p) {
    const double* plane = in + p * h * w;
    double* mplane = mid + p * h * w;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const double center = plane[y * w + x];
        double acc = 0.0;
        for (int64_t k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<size_t>(k + radius)] *
                 (plane[y * w + reflect_index(x + k, w)] - center);
        }
        mplane[y * w + x] = center + acc;
      }
    }
    double* oplane = dst + p * h * w;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const double center = mplane[y * w + x];
        double acc = 0.0;
        for (int64_t k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<size_t>(k + radius)] *
                 (mplane[reflect_index(y + k, h) * w + x] - center);
        }
        oplane[y * w + x] = center + acc;
      }
    }
  }
  return out;
}

}  // namespace

ImageBatch gaussian_blur(const ImageBatch& img, double sigma) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw Error(ErrorKind::Validation, "gaussian_blur: sigma must be > 0");
  }
  const auto src = img.tensor().to(torch::kDouble).contiguous();
  return ImageBatch::from_tensor_clamped(
      blur_planes(src, sigma).to(img.tensor().scalar_type()));
}

ImageBatch unsharp_mask(const ImageBatch& img, const SharpenParams& params) {
  params.validate();
  const auto src = img.tensor().to(torch::kDouble).contiguous();
  auto detail = src - blur_planes(src, params.sigma);
  if (params.threshold > 0.0) {
    detail = torch::where(detail.abs() < params.threshold, torch::zeros_like(detail), detail);
  }
  auto out = (src + params.amount * detail).clamp(0.0, 1.0);
  return ImageBatch::from_tensor(out.to(img.tensor().scalar_type()));
}

}  // namespace sharpmask
