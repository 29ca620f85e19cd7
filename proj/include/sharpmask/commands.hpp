#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sharpmask/config.hpp"

namespace sharpmask {

/// Fixed artifact layout shared by every subcommand writing into `--out`.
struct RunLayout {
  std::filesystem::path out;
  std::filesystem::path data;  // dataset root: dataset.root or `<out>/data`

  RunLayout(std::filesystem::path out_dir, const ExperimentConfig& config);

  std::filesystem::path checkpoints() const { return out / "checkpoints"; }
  std::filesystem::path logs() const { return out / "logs"; }
  std::filesystem::path samples() const { return out / "samples"; }
  std::filesystem::path detector_checkpoint(const std::string& name) const {
    return checkpoints() / ("detector_" + name + ".ckpt");
  }
  std::filesystem::path split_manifest(Split split) const;
};

struct CommandContext {
  ExperimentConfig config;
  std::filesystem::path out;
};

void run_prepare_data(const CommandContext& ctx);
void run_train_detectors(const CommandContext& ctx);
void run_train_fdn(const CommandContext& ctx);
void run_train_ven(const CommandContext& ctx);
void run_attack(const CommandContext& ctx);
void run_evaluate(const CommandContext& ctx);
void run_report(const CommandContext& ctx);

/// prepare-data -> train-detectors -> train-fdn -> train-ven -> attack ->
/// evaluate -> report, chaining checkpoints through the run layout.
void run_toy_e2e(const CommandContext& ctx);

/// Writes `<out>/resolved_config.json` and `<out>/digests.json` (digest of
/// every checkpoint under `<out>/checkpoints`).
void write_run_metadata(const CommandContext& ctx);

std::vector<std::string> subcommand_names();

/// Dispatches by name and writes the run metadata afterwards.
void run_subcommand(const std::string& name, const CommandContext& ctx);

}  // namespace sharpmask
