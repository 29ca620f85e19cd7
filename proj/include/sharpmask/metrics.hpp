#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpmask/detectors.hpp"
#include "sharpmask/image.hpp"

namespace sharpmask {

/// Fraction of FAKE predictions over images that are all fakes; nullopt
/// (reported as N/A) when there are none.
std::optional<double> prediction_precision(const std::vector<Label>& labels);
std::optional<double> prediction_precision(const std::vector<Prediction>& predictions);

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// Per-image 10 log10(1 / MSE) over all channels and pixels, MAX = 1.
std::vector<double> psnr(const ImageBatch& a, const ImageBatch& b);

struct SsimParams {
  int64_t window = 11;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/// Per-image SSIM on the channel-mean grayscale image, averaged over every
/// fully contained Gaussian window. Images smaller than the window are
/// scored as one window covering the whole image with uniform weights.
std::vector<double> ssim(const ImageBatch& a, const ImageBatch& b, const SsimParams& params = {});

/// Aggregate of per-image scores. Infinite entries (identical-image PSNR)
/// are counted but left out of mean and median.
struct ScoreSummary {
  std::optional<double> mean;
  std::optional<double> median;
  int64_t n_finite = 0;
  int64_t n_infinite = 0;
};

ScoreSummary summarize_scores(const std::vector<double>& scores);
void to_json(nlohmann::json& j, const ScoreSummary& s);

struct FaceDetection {
  bool detected = false;
  double confidence = 0.0;
};

/// Face-detector plug-in: one decoded image in, detected-or-not out.
using FaceDetectorFn = std::function<FaceDetection(const ImageBatch& image)>;

/// Named face-detector plug-ins. Starts with "variance_stub", which reports
/// a face whenever the grayscale variance exceeds a floor.
class FaceDetectorRegistry {
 public:
  static FaceDetectorRegistry& instance();

  void add(const std::string& name, FaceDetectorFn fn);
  const FaceDetectorFn* find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  FaceDetectorRegistry();
  std::map<std::string, FaceDetectorFn> plugins_;
};

inline constexpr double kVarianceStubFloor = 1e-3;
FaceDetection variance_stub_detect(const ImageBatch& image);

/// Fraction of images with a detected face; nullopt (SKIPPED) without a
/// plug-in or without images.
std::optional<double> face_detection_rate(const std::vector<ImageBatch>& images,
                                          const FaceDetectorFn* plugin);

}  // namespace sharpmask
