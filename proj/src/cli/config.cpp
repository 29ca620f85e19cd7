#include "sharpmask/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sharpmask/error.hpp"
#include "sharpmask/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sharpmask {

namespace {

// Sections whose keys are user-chosen names rather than a fixed schema.
const std::set<std::string> kOpenMaps = {"detectors.weights", "eval.external_methods"};

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Issues {
  std::vector<std::string> keys;
  std::vector<std::string> messages;

  void add(const std::string& key, const std::string& message) {
    keys.push_back(key);
    messages.push_back(key + ": " + message);
  }

  void throw_if_any() const {
    if (keys.empty()) return;
    std::string msg = "invalid configuration: ";
    for (size_t i = 0; i < messages.size(); ++i) msg += (i ? "; " : "") + messages[i];
    throw Error(ErrorKind::Validation, msg, keys);
  }
};

void merge_layer(json& base, const json& layer, const std::string& prefix, Issues& issues) {
  for (const auto& [key, value] : layer.items()) {
    const auto path = join_key(prefix, key);
    if (!base.contains(key)) {
      issues.add(path, "unknown key");
      continue;
    }
    auto& slot = base[key];
    if (kOpenMaps.count(path)) {
      if (!value.is_object()) {
        issues.add(path, "expected an object of name -> path");
      } else {
        slot = value;
      }
    } else if (slot.is_object()) {
      if (!value.is_object()) {
        issues.add(path, "expected a section");
      } else {
        merge_layer(slot, value, path, issues);
      }
    } else {
      slot = value;
    }
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

void apply_override(json& doc, const std::string& assignment, Issues& issues) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    issues.add(assignment, "override must look like key=value");
    return;
  }
  const auto key = assignment.substr(0, eq);
  const auto value = parse_override_value(assignment.substr(eq + 1));
  json* node = &doc;
  std::string path;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> segments;
  while (std::getline(parts, part, '.')) segments.push_back(part);
  for (size_t i = 0; i < segments.size(); ++i) {
    path = join_key(path, segments[i]);
    const bool last = i + 1 == segments.size();
    if (kOpenMaps.count(path) && i + 2 == segments.size()) {
      (*node)[segments[i]][segments[i + 1]] = value;
      return;
    }
    if (!node->is_object() || !node->contains(segments[i])) {
      issues.add(key, "unknown key");
      return;
    }
    node = &(*node)[segments[i]];
    if (last) {
      if (node->is_object() && !kOpenMaps.count(path)) {
        issues.add(key, "cannot override a whole section");
        return;
      }
      *node = value;
    }
  }
}

// Typed, error-collecting access into the merged document.
class Reader {
 public:
  Reader(const json& doc, Issues& issues) : doc_(doc), issues_(issues) {}

  const json* at(const std::string& key) const {
    const json* node = &doc_;
    std::stringstream parts(key);
    std::string part;
    while (std::getline(parts, part, '.')) {
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &node->at(part);
    }
    return node;
  }

  template <typename Check>
  bool require(const std::string& key, Check check, const char* expected) {
    const json* node = at(key);
    if (node == nullptr) {
      issues_.add(key, "missing");
      return false;
    }
    if (!check(*node)) {
      issues_.add(key, std::string("expected ") + expected);
      return false;
    }
    return true;
  }

  void integer(const std::string& key, int64_t& out, int64_t min) {
    if (!require(key, [](const json& j) { return j.is_number_integer(); }, "an integer")) return;
    const auto v = at(key)->get<int64_t>();
    if (v < min) {
      issues_.add(key, "must be >= " + std::to_string(min));
      return;
    }
    out = v;
  }

  void seed(const std::string& key, uint64_t& out) {
    if (!require(key, [](const json& j) {
                   return j.is_number_unsigned() || (j.is_number_integer() && j.get<int64_t>() >= 0);
                 },
                 "a non-negative integer")) {
      return;
    }
    out = at(key)->get<uint64_t>();
  }

  void number(const std::string& key, double& out, double min, bool min_exclusive,
              std::optional<double> max = std::nullopt, bool max_exclusive = false) {
    if (!require(key, [](const json& j) { return j.is_number(); }, "a number")) return;
    const auto v = at(key)->get<double>();
    const bool low = min_exclusive ? !(v > min) : !(v >= min);
    const bool high = max && (max_exclusive ? !(v < *max) : !(v <= *max));
    if (!std::isfinite(v) || low || high) {
      std::ostringstream os;
      os << "must be " << (min_exclusive ? "> " : ">= ") << min;
      if (max) os << " and " << (max_exclusive ? "< " : "<= ") << *max;
      issues_.add(key, os.str());
      return;
    }
    out = v;
  }

  void boolean(const std::string& key, bool& out) {
    if (!require(key, [](const json& j) { return j.is_boolean(); }, "true or false")) return;
    out = at(key)->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    if (!require(key, [](const json& j) { return j.is_string(); }, "a string")) return std::nullopt;
    return at(key)->get<std::string>();
  }

  void optional_path(const std::string& key, std::optional<fs::path>& out) {
    if (!require(key, [](const json& j) { return j.is_null() || j.is_string(); },
                 "a path or null")) {
      return;
    }
    const auto& node = *at(key);
    if (node.is_null()) {
      out.reset();
    } else if (node.get<std::string>().empty()) {
      issues_.add(key, "path must not be empty");
    } else {
      out = fs::path(node.get<std::string>());
    }
  }

  void path_map(const std::string& key, std::map<std::string, fs::path>& out) {
    if (!require(key, [](const json& j) { return j.is_object(); }, "an object")) return;
    for (const auto& [name, value] : at(key)->items()) {
      if (!value.is_string() || value.get<std::string>().empty()) {
        issues_.add(join_key(key, name), "expected a path");
        continue;
      }
      out[name] = value.get<std::string>();
    }
  }

  template <typename Enum, size_t N>
  void choice(const std::string& key, Enum& out, const std::array<Enum, N>& options) {
    const auto text = string(key);
    if (!text) return;
    std::string allowed;
    for (const auto& o : options) {
      if (*text == to_string(o)) {
        out = o;
        return;
      }
      allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(o));
    }
    issues_.add(key, "must be one of " + allowed);
  }

  Issues& issues() { return issues_; }

 private:
  const json& doc_;
  Issues& issues_;
};

void read_g1(Reader& r, G1Config& c) {
  r.integer("model.g1.base_channels", c.base_channels, 1);
  r.integer("model.g1.depth", c.depth, 1);
  r.integer("model.g1.input_channels", c.input_channels, 3);
  r.integer("model.g1.output_channels", c.output_channels, 3);
  if (c.input_channels != 3) r.issues().add("model.g1.input_channels", "must be 3 (RGB)");
  if (c.output_channels != 3) r.issues().add("model.g1.output_channels", "must be 3 (RGB)");
}

void read_g2(Reader& r, G2Config& c) {
  r.integer("model.g2.base_channels", c.base_channels, 1);
  r.integer("model.g2.n_blocks", c.n_blocks, 1);
  r.integer("model.g2.patch_size", c.patch_size, 1);
  r.integer("model.g2.embed_dim", c.embed_dim, 1);
  r.integer("model.g2.heads", c.heads, 1);
  r.integer("model.g2.transformer_layers", c.transformer_layers, 1);
  r.integer("model.g2.mlp_ratio", c.mlp_ratio, 1);
  if (c.embed_dim % c.heads != 0) {
    r.issues().add("model.g2.embed_dim", "must be divisible by model.g2.heads");
  }
}

void read_disc(Reader& r, const std::string& prefix, DiscriminatorConfig& c) {
  r.integer(prefix + ".base_channels", c.base_channels, 1);
  r.integer(prefix + ".n_layers", c.n_layers, 1);
}

}  // namespace

json default_config(Profile profile) {
  const bool toy = profile == Profile::Toy;
  G1Config g1;
  G2Config g2;
  DiscriminatorConfig d;
  if (!toy) {
    g1.base_channels = 64;
    g1.depth = 4;
    g2.base_channels = 32;
    g2.n_blocks = 3;
    g2.embed_dim = 96;
    d.base_channels = 64;
    d.n_layers = 4;
  }
  const DetectorSection det;
  const AttackSection att;
  const EvalSection ev;
  const TrainConfig tc;
  return json{
      {"profile", std::string(to_string(profile))},
      {"dataset",
       {{"root", nullptr},
        {"tag", toy ? "toy" : "celeb_df"},
        {"splits", {0.8, 0.1, 0.1}},
        {"seed", 0},
        {"resolution", toy ? 32 : 256},
        {"toy_pairs", 2000},
        {"frames_per_source", 4},
        {"variance_filter", true},
        {"variance_floor", 1e-4}}},
      {"sharpen", SharpenParams{}},
      {"model", {{"g1", g1}, {"g2", g2}, {"d1", d}, {"d2", d}, {"detector", det.architecture}}},
      {"train",
       {{"alpha", tc.alpha},
        {"beta", tc.beta},
        {"learning_rate", tc.learning_rate},
        {"adam_beta1", tc.adam_beta1},
        {"adam_beta2", tc.adam_beta2},
        {"batch_size", toy ? 32 : 16},
        {"steps_fdn", toy ? tc.steps_fdn : 200000},
        {"steps_ven", toy ? tc.steps_ven : 100000},
        {"d_steps_per_g", tc.d_steps_per_g},
        {"seed", 0},
        {"sample_every", toy ? tc.sample_every : 5000},
        {"freeze_check_every", tc.freeze_check_every},
        {"ven_order", std::string(to_string(tc.ven_order))},
        {"fdn_mode", std::string(to_string(tc.fdn_mode))},
        {"fdn_checkpoint", nullptr}}},
      {"detectors",
       {{"names", det.names},
        {"steps", toy ? det.steps : 20000},
        {"batch_size", det.batch_size},
        {"learning_rate", det.learning_rate},
        {"seed", 0},
        {"weights", json::object()}}},
      {"attack",
       {{"g1_checkpoint", nullptr},
        {"g2_checkpoint", nullptr},
        {"batch_size", att.batch_size},
        {"workers", att.workers},
        {"resume_from", att.resume_from},
        {"force", att.force}}},
      {"eval",
       {{"attack_dir", nullptr},
        {"face_detector", nullptr},
        {"external_methods", json::object()},
        {"batch_size", ev.batch_size}}}};
}

ExperimentConfig parse_config(const json& doc) {
  Issues issues;
  Reader r(doc, issues);
  ExperimentConfig c;

  r.choice("profile", c.profile, std::array{Profile::Toy, Profile::Full});

  auto& ds = c.dataset;
  r.optional_path("dataset.root", ds.root);
  if (const auto tag = r.string("dataset.tag")) {
    try {
      ds.tag = parse_dataset_tag(*tag);
    } catch (const Error&) {
      issues.add("dataset.tag", "must be one of celeb_df, ffpp, deeper, toy");
    }
  }
  if (r.require("dataset.splits",
                [](const json& j) {
                  return j.is_array() && j.size() == 3 &&
                         std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); });
                },
                "three numbers [train, val, test]")) {
    double sum = 0.0;
    bool negative = false;
    for (size_t i = 0; i < 3; ++i) {
      ds.splits[i] = doc.at("dataset").at("splits")[i].get<double>();
      negative |= !(ds.splits[i] >= 0.0);
      sum += ds.splits[i];
    }
    if (negative || std::abs(sum - 1.0) > 1e-9) {
      issues.add("dataset.splits", "fractions must be non-negative and sum to 1");
    }
  }
  r.seed("dataset.seed", ds.seed);
  r.integer("dataset.resolution", ds.resolution, 8);
  r.integer("dataset.toy_pairs", ds.toy_pairs, 1);
  r.integer("dataset.frames_per_source", ds.frames_per_source, 1);
  r.boolean("dataset.variance_filter", ds.variance_filter);
  r.number("dataset.variance_floor", ds.variance_floor, 0.0, false);
  if (ds.tag == DatasetTag::Toy && ds.resolution != 32 && ds.resolution != 64) {
    issues.add("dataset.resolution", "toy data is rendered at 32 or 64 px");
  }

  r.number("sharpen.sigma", c.sharpen.sigma, 0.0, true);
  r.number("sharpen.amount", c.sharpen.amount, 0.0, false);
  r.number("sharpen.threshold", c.sharpen.threshold, 0.0, false, 1.0);

  read_g1(r, c.model.g1);
  read_g2(r, c.model.g2);
  read_disc(r, "model.d1", c.model.d1);
  read_disc(r, "model.d2", c.model.d2);
  r.integer("model.detector.base_channels", c.detectors.architecture.base_channels, 1);
  if (c.model.g1.depth < 62 && ds.resolution % (int64_t{1} << c.model.g1.depth) != 0) {
    issues.add("model.g1.depth", "dataset.resolution must be divisible by 2^depth");
  }
  if (c.model.g2.patch_size > ds.resolution) {
    issues.add("model.g2.patch_size", "must not exceed dataset.resolution");
  }

  auto& t = c.train;
  t.profile = c.profile;
  r.number("train.alpha", t.alpha, 0.0, false);
  r.number("train.beta", t.beta, 0.0, false);
  r.number("train.learning_rate", t.learning_rate, 0.0, true);
  r.number("train.adam_beta1", t.adam_beta1, 0.0, false, 1.0, true);
  r.number("train.adam_beta2", t.adam_beta2, 0.0, false, 1.0, true);
  r.integer("train.batch_size", t.batch_size, 1);
  r.integer("train.steps_fdn", t.steps_fdn, 1);
  r.integer("train.steps_ven", t.steps_ven, 1);
  r.integer("train.d_steps_per_g", t.d_steps_per_g, 1);
  r.seed("train.seed", t.seed);
  r.integer("train.sample_every", t.sample_every, 0);
  r.integer("train.freeze_check_every", t.freeze_check_every, 1);
  r.choice("train.ven_order", t.ven_order, std::array{VenOrder::G2ThenG1, VenOrder::G1ThenG2});
  r.choice("train.fdn_mode", t.fdn_mode, std::array{FdnMode::TwoStage, FdnMode::SingleGan});
  r.optional_path("train.fdn_checkpoint", c.fdn_checkpoint);

  auto& det = c.detectors;
  if (r.require("detectors.names",
                [](const json& j) {
                  return j.is_array() &&
                         std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_string(); });
                },
                "a list of detector names")) {
    det.names = doc.at("detectors").at("names").get<std::vector<std::string>>();
  }
  r.integer("detectors.steps", det.steps, 1);
  r.integer("detectors.batch_size", det.batch_size, 1);
  r.number("detectors.learning_rate", det.learning_rate, 0.0, true);
  r.seed("detectors.seed", det.seed);
  r.path_map("detectors.weights", det.weights);
  std::set<std::string> seen;
  for (const auto& name : det.names) {
    const auto kind = DetectorRegistry::instance().find(name);
    if (!kind) {
      std::string known;
      for (const auto& n : DetectorRegistry::instance().names()) known += (known.empty() ? "" : ", ") + n;
      issues.add("detectors.names", "unknown detector '" + name + "' (known: " + known + ")");
    } else if (*kind == DetectorKind::TorchScript && !det.weights.count(name)) {
      issues.add("detectors.weights." + name, "external detector needs a TorchScript file");
    }
    if (!seen.insert(name).second) issues.add("detectors.names", "duplicate detector '" + name + "'");
  }

  r.optional_path("attack.g1_checkpoint", c.attack.g1_checkpoint);
  r.optional_path("attack.g2_checkpoint", c.attack.g2_checkpoint);
  r.integer("attack.batch_size", c.attack.batch_size, 1);
  r.integer("attack.workers", c.attack.workers, 1);
  r.integer("attack.resume_from", c.attack.resume_from, 0);
  r.boolean("attack.force", c.attack.force);

  r.optional_path("eval.attack_dir", c.eval.attack_dir);
  if (r.require("eval.face_detector", [](const json& j) { return j.is_null() || j.is_string(); },
                "a plug-in name or null")) {
    const auto& node = *r.at("eval.face_detector");
    if (node.is_string()) {
      c.eval.face_detector = node.get<std::string>();
      if (FaceDetectorRegistry::instance().find(*c.eval.face_detector) == nullptr) {
        issues.add("eval.face_detector", "unknown plug-in '" + *c.eval.face_detector + "'");
      }
    }
  }
  r.path_map("eval.external_methods", c.eval.external_methods);
  for (const auto& [name, _] : c.eval.external_methods) {
    if (name == "I_f" || name == "I_fu" || name == "I_s" || name == "I_rs") {
      issues.add("eval.external_methods." + name, "name collides with a built-in image family");
    }
  }
  r.integer("eval.batch_size", c.eval.batch_size, 1);

  issues.throw_if_any();
  c.resolved = doc;
  return c;
}

ExperimentConfig resolve_config(const ConfigSources& sources) {
  Issues issues;

  // The profile picks the default layer, so settle it first.
  std::string profile = "toy";
  if (sources.file && sources.file->is_object() && sources.file->contains("profile") &&
      sources.file->at("profile").is_string()) {
    profile = sources.file->at("profile").get<std::string>();
  }
  for (const auto& o : sources.overrides) {
    if (o.rfind("profile=", 0) == 0) {
      const auto v = parse_override_value(o.substr(8));
      if (v.is_string()) profile = v.get<std::string>();
    }
  }
  if (sources.env_profile && !sources.env_profile->empty()) {
    if (lower(*sources.env_profile) != "toy") {
      issues.add("SHARPMASK_PROFILE", "only TOY may be forced from the environment");
    }
    profile = "toy";
  }
  if (profile != "toy" && profile != "full") {
    issues.add("profile", "must be one of toy, full");
    profile = "toy";
  }
  const auto prof = profile == "toy" ? Profile::Toy : Profile::Full;

  json doc = default_config(prof);
  if (sources.file) {
    if (!sources.file->is_object()) {
      issues.add("<config>", "top level must be an object");
    } else {
      merge_layer(doc, *sources.file, "", issues);
    }
  }
  for (const auto& o : sources.overrides) apply_override(doc, o, issues);
  doc["profile"] = profile;

  std::optional<ExperimentConfig> config;
  try {
    config = parse_config(doc);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Validation) throw;
    issues.keys.insert(issues.keys.end(), e.keys().begin(), e.keys().end());
    std::string rest = e.what();
    const std::string prefix = "invalid configuration: ";
    if (rest.rfind(prefix, 0) == 0) rest = rest.substr(prefix.size());
    issues.messages.push_back(rest);
  }
  issues.throw_if_any();
  return *config;
}

json read_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, "config " + path.string() + " is not valid JSON: " + e.what(),
                {"<config>"});
  }
}

}  // namespace sharpmask
