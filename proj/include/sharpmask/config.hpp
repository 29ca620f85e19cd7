#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpmask/data.hpp"
#include "sharpmask/detectors.hpp"
#include "sharpmask/imaging.hpp"
#include "sharpmask/training.hpp"

namespace sharpmask {

struct DatasetSection {
  std::optional<std::filesystem::path> root;  // nullopt: `<out>/data`
  DatasetTag tag = DatasetTag::Toy;
  std::array<double, 3> splits{0.8, 0.1, 0.1};
  uint64_t seed = 0;
  int64_t resolution = 32;
  int64_t toy_pairs = 2000;
  int64_t frames_per_source = 4;
  bool variance_filter = true;
  double variance_floor = 1e-4;
};

struct DetectorSection {
  std::vector<std::string> names{"toy_cnn"};
  int64_t steps = 300;
  int64_t batch_size = 32;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
  ToyCnnConfig architecture;
  std::map<std::string, std::filesystem::path> weights;  // TorchScript files of external detectors
};

struct AttackSection {
  std::optional<std::filesystem::path> g1_checkpoint;
  std::optional<std::filesystem::path> g2_checkpoint;
  int64_t batch_size = 32;
  int64_t workers = 1;
  int64_t resume_from = 0;
  bool force = false;
};

struct EvalSection {
  std::optional<std::filesystem::path> attack_dir;  // nullopt: the run directory
  std::optional<std::string> face_detector;
  std::map<std::string, std::filesystem::path> external_methods;
  int64_t batch_size = 64;
};

/// Fully validated experiment configuration plus its resolved JSON form
/// (every default materialized).
struct ExperimentConfig {
  Profile profile = Profile::Toy;
  DatasetSection dataset;
  SharpenParams sharpen;
  GanModelConfig model;
  TrainConfig train;
  std::optional<std::filesystem::path> fdn_checkpoint;
  DetectorSection detectors;
  AttackSection attack;
  EvalSection eval;
  nlohmann::json resolved;
};

/// Every key with its default for the given profile.
nlohmann::json default_config(Profile profile);

struct ConfigSources {
  std::optional<nlohmann::json> file;    // parsed --config document
  std::vector<std::string> overrides;    // "dotted.key=value", applied in order
  std::optional<std::string> env_profile;  // SHARPMASK_PROFILE
};

/// Layers defaults <- file <- overrides, then validates. Every unknown key,
/// type mismatch and out-of-range value is reported in one Validation error
/// whose keys() lists the offending dotted paths.
ExperimentConfig resolve_config(const ConfigSources& sources);

/// Typed view of an already merged document (no layering).
ExperimentConfig parse_config(const nlohmann::json& document);

/// Reads a JSON config file; syntax errors become Validation errors.
nlohmann::json read_config_file(const std::filesystem::path& path);

}  // namespace sharpmask
