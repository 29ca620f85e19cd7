#include "sharpmask/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

const PrecisionCell* EvalReport::precision(const std::string& detector,
                                           const std::string& family) const {
  for (const auto& row : detectors) {
    if (row.detector != detector) continue;
    for (size_t i = 0; i < families.size() && i < row.cells.size(); ++i) {
      if (families[i].key == family) return &row.cells[i];
    }
  }
  return nullptr;
}

const QualityEntry* EvalReport::quality_of(const std::string& method,
                                           const std::string& reference) const {
  for (const auto& q : quality) {
    if (q.method == method && q.reference == reference) return &q;
  }
  return nullptr;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

ScoreSummary summary_from(const nlohmann::json& j) {
  ScoreSummary s;
  s.mean = opt_from(j.at("mean"));
  s.median = opt_from(j.at("median"));
  j.at("n_finite").get_to(s.n_finite);
  j.at("n_infinite").get_to(s.n_infinite);
  return s;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string percent_cell(const PrecisionCell& c) {
  return c.precision ? fixed(100.0 * *c.precision, 2) + "%" : "N/A";
}

std::string summary_cell(const ScoreSummary& s, int digits) {
  return s.mean ? fixed(*s.mean, digits) : "N/A";
}

std::string arrow(bool lower_is_better) { return lower_is_better ? "↓" : "↑"; }

std::string render_markdown(const EvalReport& r) {
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  out << "Dataset: " << r.dataset << "\n\n";
  if (!r.metadata.empty()) {
    for (const auto& [key, value] : r.metadata.items()) {
      out << "- " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
          << '\n';
    }
    out << '\n';
  }

  out << "## Prediction precision on fake frames\n\n";
  out << "Share of fake frames each detector labels FAKE. ↑ marks baseline columns, ↓ marks "
         "attack columns where lower means a stronger attack.\n\n";
  out << "| Detector |";
  for (const auto& f : r.families) out << ' ' << f.key << ' ' << arrow(f.lower_is_better) << " |";
  out << "\n|---|";
  for (size_t i = 0; i < r.families.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& row : r.detectors) {
    out << "| " << row.detector << " |";
    for (const auto& c : row.cells) out << ' ' << percent_cell(c) << " |";
    out << '\n';
  }

  out << "\n## Quality of attack outputs\n\n";
  out << "| Metric |";
  for (const auto& q : r.quality) out << ' ' << q.method << " vs " << q.reference << " |";
  out << "\n|---|";
  for (size_t i = 0; i < r.quality.size(); ++i) out << "---|";
  out << "\n| PSNR (dB) ↑ |";
  for (const auto& q : r.quality) out << ' ' << summary_cell(q.psnr, 4) << " |";
  out << "\n| SSIM ↑ |";
  for (const auto& q : r.quality) out << ' ' << summary_cell(q.ssim, 4) << " |";
  out << "\n| FaceDetection ↑ |";
  for (const auto& q : r.quality) {
    out << ' ' << (q.face_detection_rate ? fixed(100.0 * *q.face_detection_rate, 2) + "%" : "SKIPPED")
        << " |";
  }
  out << "\n\nCells show means over images.";
  int64_t excluded = 0;
  for (const auto& q : r.quality) excluded += q.psnr.n_infinite;
  if (excluded > 0) {
    out << " PSNR means exclude " << excluded
        << " identical-image pairs (infinite PSNR); per-column counts are in report.json.";
  }
  if (!r.face_detector) out << " FaceDetection is SKIPPED because no face-detector plug-in is configured.";
  else out << " FaceDetection uses the `" << *r.face_detector << "` plug-in.";
  out << '\n';
  return out.str();
}

std::string render_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "table,row,column,value,n\n";
  for (const auto& row : r.detectors) {
    for (size_t i = 0; i < r.families.size() && i < row.cells.size(); ++i) {
      const auto& c = row.cells[i];
      out << "precision," << row.detector << ',' << r.families[i].key << ','
          << (c.precision ? fixed(*c.precision, 6) : "N/A") << ',' << c.n << '\n';
    }
  }
  for (const auto& q : r.quality) {
    const std::string column = q.method + " vs " + q.reference;
    out << "quality,PSNR," << column << ',' << (q.psnr.mean ? fixed(*q.psnr.mean, 6) : "N/A") << ','
        << q.psnr.n_finite << '\n';
    out << "quality,SSIM," << column << ',' << (q.ssim.mean ? fixed(*q.ssim.mean, 6) : "N/A") << ','
        << q.ssim.n_finite << '\n';
    out << "quality,FaceDetection," << column << ','
        << (q.face_detection_rate ? fixed(*q.face_detection_rate, 6) : "SKIPPED") << ','
        << q.psnr.n_finite + q.psnr.n_infinite << '\n';
  }
  return out.str();
}

}  // namespace

void to_json(nlohmann::json& j, const EvalReport& r) {
  auto families = nlohmann::json::array();
  for (const auto& f : r.families) {
    families.push_back({{"key", f.key}, {"direction", f.lower_is_better ? "down" : "up"}});
  }
  auto detectors = nlohmann::json::array();
  for (const auto& row : r.detectors) {
    auto cells = nlohmann::json::array();
    for (const auto& c : row.cells) cells.push_back({{"precision", opt_json(c.precision)}, {"n", c.n}});
    detectors.push_back({{"detector", row.detector}, {"cells", cells}});
  }
  auto quality = nlohmann::json::array();
  for (const auto& q : r.quality) {
    quality.push_back({{"method", q.method},
                       {"reference", q.reference},
                       {"psnr", q.psnr},
                       {"ssim", q.ssim},
                       {"face_detection_rate", opt_json(q.face_detection_rate)}});
  }
  j = {{"dataset", r.dataset},
       {"metadata", r.metadata},
       {"face_detector", r.face_detector ? nlohmann::json(*r.face_detector) : nlohmann::json(nullptr)},
       {"families", families},
       {"detectors", detectors},
       {"quality", quality}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  r = EvalReport{};
  j.at("dataset").get_to(r.dataset);
  r.metadata = j.at("metadata");
  if (!j.at("face_detector").is_null()) r.face_detector = j.at("face_detector").get<std::string>();
  for (const auto& f : j.at("families")) {
    r.families.push_back({f.at("key").get<std::string>(), f.at("direction").get<std::string>() == "down"});
  }
  for (const auto& d : j.at("detectors")) {
    DetectorRow row;
    d.at("detector").get_to(row.detector);
    for (const auto& c : d.at("cells")) {
      row.cells.push_back({opt_from(c.at("precision")), c.at("n").get<int64_t>()});
    }
    r.detectors.push_back(std::move(row));
  }
  for (const auto& q : j.at("quality")) {
    r.quality.push_back({q.at("method").get<std::string>(), q.at("reference").get<std::string>(),
                         summary_from(q.at("psnr")), summary_from(q.at("ssim")),
                         opt_from(q.at("face_detection_rate"))});
  }
}

std::string render_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown:
      return render_markdown(report);
    case ReportFormat::Csv:
      return render_csv(report);
    case ReportFormat::Json:
      return nlohmann::json(report).dump(2) + "\n";
  }
  return {};
}

void emit_report(const EvalReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const std::pair<const char*, ReportFormat> files[] = {{"report.md", ReportFormat::Markdown},
                                                         {"report.csv", ReportFormat::Csv},
                                                         {"report.json", ReportFormat::Json}};
  for (const auto& [name, format] : files) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (out_dir / name).string());
    out << render_report(report, format);
  }
}

}  // namespace sharpmask
