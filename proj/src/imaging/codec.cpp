#include "sharpmask/codec.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "sharpmask/error.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string() +
                                     ": " + ec.message());
    }
  }
}

uint8_t quantize(double v) {
  // nearbyint follows the default round-to-nearest-even mode.
  return static_cast<uint8_t>(std::nearbyint(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_rgb(const fs::path& path, int64_t width, int64_t height,
               const std::vector<uint8_t>& pixels) {
  ensure_parent(path);
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::Io, "cannot write " + path.string() + ": " + png.image.message);
  }
}

}  // namespace

ImageBatch load_image(const fs::path& path, std::optional<int64_t> expected_size) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw Error(ErrorKind::Io, "cannot read " + path.string() + ": " + png.image.message);
  }
  if (png.image.format != PNG_FORMAT_RGB) {
    throw Error(ErrorKind::Io, path.string() + ": not an 8-bit RGB image");
  }
  const int64_t w = png.image.width;
  const int64_t h = png.image.height;
  if (w != h) {
    throw Error(ErrorKind::Io, path.string() + ": image is not square");
  }
  if (expected_size && w != *expected_size) {
    throw Error(ErrorKind::Io, path.string() + ": expected " + std::to_string(*expected_size) +
                                   " px, found " + std::to_string(w));
  }
  std::vector<uint8_t> pixels(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::Io, "cannot decode " + path.string() + ": " + png.image.message);
  }
  auto out = torch::empty({1, 3, h, w}, torch::kFloat);
  auto acc = out.accessor<float, 4>();
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int64_t c = 0; c < 3; ++c) {
        acc[0][c][y][x] = static_cast<float>(pixels[static_cast<size_t>((y * w + x) * 3 + c)]) / 255.0f;
      }
    }
  }
  return ImageBatch::from_tensor(out);
}

void save_image(const fs::path& path, const ImageBatch& img) {
  if (img.batch() != 1) {
    throw Error(ErrorKind::Shape, "save_image: expected a single image for " + path.string());
  }
  const auto t = img.tensor().to(torch::kDouble);
  const auto acc = t.accessor<double, 4>();
  const int64_t h = img.height();
  const int64_t w = img.width();
  std::vector<uint8_t> pixels(static_cast<size_t>(h * w * 3));
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      for (int64_t c = 0; c < 3; ++c) {
        pixels[static_cast<size_t>((y * w + x) * 3 + c)] = quantize(acc[0][c][y][x]);
      }
    }
  }
  write_rgb(path, w, h, pixels);
}

ImageBatch quantize_8bit(const ImageBatch& images) {
  const auto levels = (images.tensor().to(torch::kDouble).clamp(0.0, 1.0) * 255.0).round();
  return ImageBatch::from_tensor(levels.to(torch::kFloat) / 255.0f);
}

void save_image_grid(const fs::path& path, const std::vector<std::vector<ImageBatch>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorKind::Shape, "save_image_grid: empty grid");
  }
  const int64_t tile = rows.front().front().height();
  size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  const int64_t w = tile * static_cast<int64_t>(cols);
  const int64_t h = tile * static_cast<int64_t>(rows.size());
  std::vector<uint8_t> pixels(static_cast<size_t>(w * h * 3), 0);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      const auto& img = rows[r][c];
      if (img.height() != tile || img.batch() != 1) {
        throw Error(ErrorKind::Shape, "save_image_grid: tiles must be single images of equal size");
      }
      const auto t = img.tensor().to(torch::kDouble);
      const auto acc = t.accessor<double, 4>();
      for (int64_t y = 0; y < tile; ++y) {
        for (int64_t x = 0; x < tile; ++x) {
          const int64_t gy = static_cast<int64_t>(r) * tile + y;
          const int64_t gx = static_cast<int64_t>(c) * tile + x;
          for (int64_t ch = 0; ch < 3; ++ch) {
            pixels[static_cast<size_t>((gy * w + gx) * 3 + ch)] = quantize(acc[0][ch][y][x]);
          }
        }
      }
    }
  }
  write_rgb(path, w, h, pixels);
}

void save_mask_visualization(const fs::path& png_path, const MaskVisualization& vis) {
  save_image(png_path, vis.image);
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  write_json_file(sidecar, nlohmann::json{{"min", vis.min}, {"max", vis.max}});
}

torch::Tensor load_mask_visualization(const fs::path& png_path) {
  auto sidecar = png_path;
  sidecar.replace_extension(".json");
  const auto meta = read_json_file(sidecar);
  const auto img = load_image(png_path);
  return unvisualize_mask(img, meta.at("min").get<double>(), meta.at("max").get<double>());
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

}  // namespace sharpmask
