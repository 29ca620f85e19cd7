#include "sharpmask/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "sharpmask/error.hpp"

namespace sharpmask {

std::optional<double> prediction_precision(const std::vector<Label>& labels) {
  if (labels.empty()) return std::nullopt;
  const auto fakes = std::count(labels.begin(), labels.end(), Label::Fake);
  return static_cast<double>(fakes) / static_cast<double>(labels.size());
}

std::optional<double> prediction_precision(const std::vector<Prediction>& predictions) {
  std::vector<Label> labels;
  labels.reserve(predictions.size());
  for (const auto& p : predictions) labels.push_back(p.label);
  return prediction_precision(labels);
}

namespace {

void require_same_shape(const ImageBatch& a, const ImageBatch& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::Shape, std::string(what) + ": image batches differ in shape");
  }
}

torch::Tensor ssim_window(int64_t size, double sigma) {
  auto k = torch::empty({size}, torch::kDouble);
  const double center = static_cast<double>(size - 1) / 2.0;
  for (int64_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - center;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return k / k.sum();
}

}  // namespace

std::vector<double> psnr(const ImageBatch& a, const ImageBatch& b) {
  require_same_shape(a, b, "psnr");
  const auto diff = a.tensor().to(torch::kDouble) - b.tensor().to(torch::kDouble);
  const auto mse = diff.square().flatten(1).mean(1).contiguous();
  std::vector<double> out;
  for (int64_t i = 0; i < mse.size(0); ++i) {
    const double m = mse[i].item<double>();
    out.push_back(m == 0.0 ? kPsnrIdentical : 10.0 * std::log10(1.0 / m));
  }
  return out;
}

std::vector<double> ssim(const ImageBatch& a, const ImageBatch& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  if (params.window < 1 || !(params.sigma > 0.0)) {
    throw Error(ErrorKind::Validation, "ssim: window must be >= 1 and sigma > 0");
  }
  const auto x = a.tensor().to(torch::kDouble).mean(1, true);
  const auto y = b.tensor().to(torch::kDouble).mean(1, true);
  const int64_t h = x.size(2);
  const int64_t w = x.size(3);

  torch::Tensor weights;
  if (h < params.window || w < params.window) {
    weights = torch::full({1, 1, h, w}, 1.0 / static_cast<double>(h * w), torch::kDouble);
  } else {
    const auto k = ssim_window(params.window, params.sigma);
    weights = torch::outer(k, k).reshape({1, 1, params.window, params.window});
  }
  auto filt = [&](const torch::Tensor& t) { return torch::conv2d(t, weights); };

  const auto mu_x = filt(x);
  const auto mu_y = filt(y);
  const auto sxx = filt(x * x) - mu_x * mu_x;
  const auto syy = filt(y * y) - mu_y * mu_y;
  const auto sxy = filt(x * y) - mu_x * mu_y;
  const auto num = (2.0 * mu_x * mu_y + params.c1) * (2.0 * sxy + params.c2);
  const auto den = (mu_x * mu_x + mu_y * mu_y + params.c1) * (sxx + syy + params.c2);
  const auto per_image = (num / den).flatten(1).mean(1).contiguous();
  return {per_image.data_ptr<double>(), per_image.data_ptr<double>() + per_image.numel()};
}

ScoreSummary summarize_scores(const std::vector<double>& scores) {
  ScoreSummary s;
  std::vector<double> finite;
  for (double v : scores) {
    if (std::isinf(v)) {
      ++s.n_infinite;
    } else {
      finite.push_back(v);
    }
  }
  s.n_finite = static_cast<int64_t>(finite.size());
  if (finite.empty()) return s;
  double sum = 0.0;
  for (double v : finite) sum += v;
  s.mean = sum / static_cast<double>(finite.size());
  std::sort(finite.begin(), finite.end());
  const size_t n = finite.size();
  s.median = n % 2 == 1 ? finite[n / 2] : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
  return s;
}

void to_json(nlohmann::json& j, const ScoreSummary& s) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j = {{"mean", opt(s.mean)},
       {"median", opt(s.median)},
       {"n_finite", s.n_finite},
       {"n_infinite", s.n_infinite}};
}

}  // namespace sharpmask
