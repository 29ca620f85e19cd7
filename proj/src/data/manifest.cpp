#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sharpmask/codec.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/error.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

std::string_view to_string(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::CelebDf: return "celeb_df";
    case DatasetTag::Ffpp: return "ffpp";
    case DatasetTag::Deeper: return "deeper";
    case DatasetTag::Toy: return "toy";
  }
  return "unknown";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    case Split::All: return "all";
  }
  return "unknown";
}

DatasetTag parse_dataset_tag(std::string_view text) {
  for (auto tag : {DatasetTag::CelebDf, DatasetTag::Ffpp, DatasetTag::Deeper, DatasetTag::Toy}) {
    if (text == to_string(tag)) return tag;
  }
  throw Error(ErrorKind::Validation, "unknown dataset tag '" + std::string(text) + "'");
}

uint64_t SplitMix::next() {
  uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SplitMix::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t SplitMix::below(uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % n;
}

std::string source_id_from_stem(std::string_view stem) {
  const auto pos = stem.rfind('_');
  if (pos == std::string_view::npos || pos == 0) return std::string(stem);
  return std::string(stem.substr(0, pos));
}

std::string serialize_manifest(const Manifest& manifest) {
  std::string out;
  for (const auto& s : manifest.samples) {
    nlohmann::ordered_json line;
    line["real"] = s.real_path.generic_string();
    line["fake"] = s.fake_path.generic_string();
    line["source_id"] = s.source_id;
    line["dataset"] = std::string(to_string(s.dataset_tag));
    out += line.dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const fs::path& file, const Manifest& manifest) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest " + file.string());
  out << serialize_manifest(manifest);
}

Manifest read_manifest(const fs::path& file, Split split, int64_t resolution) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read manifest " + file.string());
  Manifest m;
  m.split = split;
  m.resolution = resolution;
  m.root = file.parent_path();
  std::string line;
  size_t line_no = 0;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PairedSample s;
      s.real_path = j.at("real").get<std::string>();
      s.fake_path = j.at("fake").get<std::string>();
      s.source_id = j.at("source_id").get<std::string>();
      s.dataset_tag = parse_dataset_tag(j.at("dataset").get<std::string>());
      if (!seen.emplace(s.real_path.string(), s.fake_path.string()).second) {
        throw Error(ErrorKind::Validation, "duplicate pair");
      }
      m.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Io,
                  file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return m;
}

namespace {

std::vector<std::string> list_pngs(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) return names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

double channel_mean_variance(const ImageBatch& img) {
  return img.tensor().to(torch::kDouble).mean(1).var(/*unbiased=*/false).item<double>();
}

}  // namespace

ManifestSet build_manifest(const fs::path& root, DatasetTag tag,
                           const ManifestBuildOptions& options) {
  const auto& f = options.split_fractions;
  const double total = f[0] + f[1] + f[2];
  if (f[0] < 0 || f[1] < 0 || f[2] < 0 || std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::Validation, "split fractions must be >= 0 and sum to 1");
  }

  const auto reals = list_pngs(root / "real");
  const auto fakes = list_pngs(root / "fake");
  ManifestSet set;
  std::vector<std::string> matched;
  std::set_intersection(reals.begin(), reals.end(), fakes.begin(), fakes.end(),
                        std::back_inserter(matched));
  std::set_difference(reals.begin(), reals.end(), fakes.begin(), fakes.end(),
                      std::back_inserter(set.unmatched));
  std::set_difference(fakes.begin(), fakes.end(), reals.begin(), reals.end(),
                      std::back_inserter(set.unmatched));
  std::sort(set.unmatched.begin(), set.unmatched.end());

  std::map<std::string, std::vector<std::string>> by_source;
  for (const auto& name : matched) {
    if (options.variance_filter) {
      const auto real = load_image(root / "real" / name, options.resolution);
      const auto fake = load_image(root / "fake" / name, options.resolution);
      if (channel_mean_variance(real) < options.variance_floor ||
          channel_mean_variance(fake) < options.variance_floor) {
        ++set.rejected_low_variance;
        continue;
      }
    }
    by_source[source_id_from_stem(fs::path(name).stem().string())].push_back(name);
  }
  if (by_source.empty()) {
    throw Error(ErrorKind::Validation, "no usable real/fake pairs under " + root.string());
  }

  std::vector<std::string> sources;
  for (const auto& [id, _] : by_source) sources.push_back(id);
  deterministic_shuffle(sources, options.seed);

  const auto n = static_cast<int64_t>(sources.size());
  const int64_t n_train = std::min<int64_t>(n, std::llround(f[0] * static_cast<double>(n)));
  const int64_t n_val =
      std::min<int64_t>(n - n_train, std::llround(f[1] * static_cast<double>(n)));

  Manifest* targets[3] = {&set.train, &set.val, &set.test};
  const Split splits[3] = {Split::Train, Split::Val, Split::Test};
  for (int k = 0; k < 3; ++k) {
    targets[k]->split = splits[k];
    targets[k]->resolution = options.resolution;
    targets[k]->seed = options.seed;
    targets[k]->root = root;
  }
  for (int64_t i = 0; i < n; ++i) {
    Manifest& target = i < n_train ? set.train : (i < n_train + n_val ? set.val : set.test);
    const auto& id = sources[static_cast<size_t>(i)];
    for (const auto& name : by_source[id]) {
      target.samples.push_back(
          PairedSample{fs::path("real") / name, fs::path("fake") / name, id, tag});
    }
  }
  return set;
}

void write_manifest_set(const fs::path& root, const ManifestSet& set) {
  write_manifest(root / "train.jsonl", set.train);
  write_manifest(root / "val.jsonl", set.val);
  write_manifest(root / "test.jsonl", set.test);
  nlohmann::json summary;
  summary["resolution"] = set.train.resolution;
  summary["seed"] = set.train.seed;
  summary["counts"] = {{"train", set.train.size()}, {"val", set.val.size()},
                       {"test", set.test.size()}};
  summary["unmatched"] = set.unmatched;
  summary["rejected_low_variance"] = set.rejected_low_variance;
  write_json_file(root / "manifests.json", summary);
}

}  // namespace sharpmask
