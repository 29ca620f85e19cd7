#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace sharpmask {

enum class StageTag { FdnG1, FdnD1, VenG2, VenD2, Detector };

std::string_view to_string(StageTag tag);
StageTag parse_stage_tag(std::string_view text);

/// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 over the canonical encoding of named tensors: sorted by name,
/// each contributing name, dtype, shape and little-endian raw data.
std::string tensor_digest(const std::vector<std::pair<std::string, torch::Tensor>>& named);

/// Digest of a module's parameters and buffers.
std::string parameter_digest(const torch::nn::Module& module);

struct StageCheckpoint {
  StageTag stage = StageTag::FdnG1;
  nlohmann::json architecture;  // model config, enough to rebuild the module
  nlohmann::json metadata;      // step count, seed, provenance digests
  std::string digest;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;  // sorted by name
};

/// Snapshot of a module's parameters and buffers (deep copies).
StageCheckpoint capture_checkpoint(const torch::nn::Module& module, StageTag stage,
                                   nlohmann::json architecture, nlohmann::json metadata);

/// Copies checkpoint tensors into the module; names and shapes must match.
void restore_checkpoint(torch::nn::Module& module, const StageCheckpoint& checkpoint);

/// Container: 16-byte magic, u64 little-endian header length, JSON header
/// (stage, architecture, metadata, digest, tensor index), raw tensor blob.
void save_checkpoint(const std::filesystem::path& path, const StageCheckpoint& checkpoint);

/// Recomputes the digest and refuses the file on mismatch.
StageCheckpoint load_checkpoint(const std::filesystem::path& path);

/// load_checkpoint plus a stage-tag check for the slot being filled.
StageCheckpoint load_checkpoint(const std::filesystem::path& path, StageTag expected);

}  // namespace sharpmask
