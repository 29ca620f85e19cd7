#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/imaging.hpp"

namespace sharpmask {

struct AttackOptions {
  std::filesystem::path out_dir;
  int64_t batch_size = 32;
  int64_t workers = 1;
  size_t resume_from = 0;  // manifest line to start at
  bool force = false;      // accept a G1 that differs from the one VEN trained against
  int histogram_bins = 20;
  double histogram_upper = 0.2;
};

struct CheckpointRef {
  std::string path;
  std::string stage;
  std::string digest;
};

/// Per-image outcome. Paths are relative to the attack output directory.
struct AttackRecord {
  size_t line = 0;
  std::string id;
  std::string input;
  std::string image;
  std::string mask_raw;
  std::string mask_vis;
  MaskStats stats;
};

struct AttackRun {
  std::string stage;  // "fdn" or "ven"
  std::string manifest_root;
  std::vector<CheckpointRef> checkpoints;
  SharpenParams sharpen;
  std::vector<AttackRecord> records;
  std::vector<int64_t> magnitude_histogram;
  double histogram_upper = 0.0;
  std::vector<std::string> warnings;
};

void to_json(nlohmann::json& j, const AttackRun& run);

/// I_s = G1(I_f) for every fake frame; writes `<out>/fdn/{images,masks}` and
/// merges the record into `<out>/run.json`.
AttackRun attack_fdn(const std::filesystem::path& g1_checkpoint, const Manifest& manifest,
                     const SharpenParams& sharpen, const AttackOptions& options);

/// I_rs = G1(G2(I_f)); writes `<out>/ven/{images,masks}`. Refuses a G1 whose
/// digest differs from the one recorded in the G2 checkpoint unless forced.
AttackRun attack_ven(const std::filesystem::path& g2_checkpoint,
                     const std::filesystem::path& g1_checkpoint, const Manifest& manifest,
                     const SharpenParams& sharpen, const AttackOptions& options);

}  // namespace sharpmask
