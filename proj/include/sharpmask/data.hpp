#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sharpmask/image.hpp"

namespace sharpmask {

enum class DatasetTag { CelebDf, Ffpp, Deeper, Toy };
enum class Split { Train, Val, Test, All };

std::string_view to_string(DatasetTag tag);
std::string_view to_string(Split split);
DatasetTag parse_dataset_tag(std::string_view text);

/// One real frame and its DeepFake counterpart. Paths are relative to the
/// owning manifest's root directory.
struct PairedSample {
  std::filesystem::path real_path;
  std::filesystem::path fake_path;
  std::string source_id;
  DatasetTag dataset_tag = DatasetTag::Toy;

  bool operator==(const PairedSample&) const = default;
};

struct Manifest {
  std::vector<PairedSample> samples;
  Split split = Split::Train;
  int64_t resolution = 32;
  uint64_t seed = 0;
  std::filesystem::path root;  // directory the sample paths are relative to

  std::filesystem::path real_file(size_t i) const { return root / samples.at(i).real_path; }
  std::filesystem::path fake_file(size_t i) const { return root / samples.at(i).fake_path; }
  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Line-delimited JSON, one {real, fake, source_id, dataset} object per line.
std::string serialize_manifest(const Manifest& manifest);
void write_manifest(const std::filesystem::path& file, const Manifest& manifest);

/// Relative paths inside the file resolve against the file's directory.
Manifest read_manifest(const std::filesystem::path& file, Split split, int64_t resolution);

/// Source identity of a `<source_id>_<frame>` file stem.
std::string source_id_from_stem(std::string_view stem);

struct ManifestBuildOptions {
  std::array<double, 3> split_fractions{0.8, 0.1, 0.1};
  uint64_t seed = 0;
  int64_t resolution = 32;
  bool variance_filter = true;
  double variance_floor = 1e-4;
};

struct ManifestSet {
  Manifest train;
  Manifest val;
  Manifest test;
  std::vector<std::string> unmatched;  // file names present on one side only
  int64_t rejected_low_variance = 0;
};

/// Scans `<root>/real/*.png` and `<root>/fake/*.png`, pairs them by file
/// name and splits by source id so no source spans two splits.
ManifestSet build_manifest(const std::filesystem::path& root, DatasetTag tag,
                           const ManifestBuildOptions& options);

/// Writes train/val/test .jsonl files plus a manifests.json summary into
/// `root`.
void write_manifest_set(const std::filesystem::path& root, const ManifestSet& set);

struct ToyDatasetOptions {
  int64_t n_pairs = 2000;
  int64_t resolution = 32;
  uint64_t seed = 0;
  int64_t frames_per_source = 4;
};

/// Procedural faces: smooth ellipse-and-gradient "real" frames and "fake"
/// counterparts carrying a local warp, a blurred patch, a color shift and a
/// faint period-2 upsampling grid inside the face region. Writes `<out>/real`, `<out>/fake` and
/// `<out>/all.jsonl`.
Manifest synthesize_toy_dataset(const ToyDatasetOptions& options,
                                const std::filesystem::path& out_dir);

/// Renders one toy pair in memory (index selects identity and frame).
std::pair<ImageBatch, ImageBatch> render_toy_pair(const ToyDatasetOptions& options,
                                                  int64_t index);

struct PairBatch {
  ImageBatch real;
  ImageBatch fake;
  std::vector<size_t> indices;  // manifest line numbers
  std::vector<std::string> source_ids;
};

/// Epoch-wise iteration over aligned real/fake batches. The order of epoch
/// `e` is a pure function of (shuffle_seed, e); the last batch may be short.
class BatchIterator {
 public:
  BatchIterator(Manifest manifest, int64_t batch_size, std::optional<uint64_t> shuffle_seed);

  /// Next batch of the current epoch, or nullopt once it is exhausted.
  std::optional<PairBatch> next();

  /// Like next(), but rolls over into the following epoch.
  PairBatch next_cycling();

  void start_epoch(int64_t epoch);
  int64_t epoch() const { return epoch_; }
  int64_t skipped() const { return skipped_; }
  const Manifest& manifest() const { return manifest_; }

 private:
  Manifest manifest_;
  int64_t batch_size_;
  std::optional<uint64_t> shuffle_seed_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  int64_t epoch_ = 0;
  int64_t skipped_ = 0;
};

/// Deterministic RNG helpers shared by data generation and shuffling.
class SplitMix {
 public:
  explicit SplitMix(uint64_t seed) : state_(seed) {}
  uint64_t next();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);
  double normal();
  uint64_t below(uint64_t n);              // [0, n)

 private:
  uint64_t state_;
};

template <typename T>
void deterministic_shuffle(std::vector<T>& items, uint64_t seed) {
  SplitMix rng(seed);
  for (size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.below(i)]);
  }
}

}  // namespace sharpmask
