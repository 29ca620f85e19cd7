#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "sharpmask/image.hpp"
#include "sharpmask/imaging.hpp"

namespace sharpmask {

/// Decodes an 8-bit RGB PNG into a 1 x 3 x H x W float batch (value / 255).
/// When `expected_size` is given the image must be that many pixels square.
ImageBatch load_image(const std::filesystem::path& path,
                      std::optional<int64_t> expected_size = std::nullopt);

/// Encodes a single-image batch as 8-bit RGB PNG, rounding half-to-even.
void save_image(const std::filesystem::path& path, const ImageBatch& img);

/// Exactly what a save_image / load_image round trip returns, in memory.
ImageBatch quantize_8bit(const ImageBatch& images);

/// Lays images out left-to-right per row; rows stacked top to bottom.
void save_image_grid(const std::filesystem::path& path,
                     const std::vector<std::vector<ImageBatch>>& rows);

/// Raw real-valued arrays in NumPy .npy format (little-endian f4/f8).
void save_npy(const std::filesystem::path& path, const torch::Tensor& array);
torch::Tensor load_npy(const std::filesystem::path& path);

/// PNG plus a JSON sidecar `<stem>.json` holding {"min", "max"}.
void save_mask_visualization(const std::filesystem::path& png_path,
                             const MaskVisualization& vis);

/// Reads the PNG and sidecar back and returns the mask in mask units.
torch::Tensor load_mask_visualization(const std::filesystem::path& png_path);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sharpmask
