#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpmask/data.hpp"
#include "sharpmask/imaging.hpp"
#include "sharpmask/metrics.hpp"

namespace sharpmask {

/// One image family scored by the detectors: the DeepFakes themselves
/// (I_f), their sharpened versions (I_fu), the attack outputs (I_s, I_rs)
/// and any externally produced method outputs.
struct FamilyColumn {
  std::string key;
  bool lower_is_better = false;  // attack columns: lower precision = stronger attack
};

struct PrecisionCell {
  std::optional<double> precision;  // nullopt = N/A
  int64_t n = 0;
};

struct DetectorRow {
  std::string detector;
  std::vector<PrecisionCell> cells;  // aligned with EvalReport::families
};

/// Image quality of `method` measured against `reference`.
struct QualityEntry {
  std::string method;
  std::string reference;
  ScoreSummary psnr;
  ScoreSummary ssim;
  std::optional<double> face_detection_rate;  // nullopt = SKIPPED
};

struct EvalReport {
  std::string dataset;
  nlohmann::json metadata = nlohmann::json::object();
  std::optional<std::string> face_detector;
  std::vector<FamilyColumn> families;
  std::vector<DetectorRow> detectors;
  std::vector<QualityEntry> quality;

  /// Cell for (detector, family); nullptr if either is absent.
  const PrecisionCell* precision(const std::string& detector, const std::string& family) const;
  const QualityEntry* quality_of(const std::string& method, const std::string& reference) const;
};

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

enum class ReportFormat { Markdown, Csv, Json };

std::string render_report(const EvalReport& report, ReportFormat format);

/// Writes report.md, report.csv and report.json into `out_dir`.
void emit_report(const EvalReport& report, const std::filesystem::path& out_dir);

struct DetectorSpec {
  std::string name;
  std::filesystem::path weights;
};

/// Outputs of another anti-forensics method, one `<id>.png` per fake frame.
struct ExternalMethod {
  std::string name;
  std::filesystem::path dir;
};

struct EvaluateOptions {
  std::filesystem::path attack_dir;  // holds run.json from attack_fdn / attack_ven
  std::vector<DetectorSpec> detectors;
  std::vector<ExternalMethod> external_methods;
  std::optional<std::string> face_detector;
  SharpenParams sharpen;
  int64_t batch_size = 64;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Scores every family of the manifest's fake frames with every detector and
/// measures attack-output quality against I_f and I_fu. I_fu is sharpened in
/// memory and quantized to 8 bits like the stored attack outputs.
EvalReport evaluate(const Manifest& manifest, const EvaluateOptions& options);

}  // namespace sharpmask
