#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "sharpmask/codec.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/error.hpp"
#include "test_support.hpp"

using namespace sharpmask;
using sharpmask::test::random_batch;
using sharpmask::test::TempDir;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `sources` source ids with `frames` frames each, random 8x8 content.
void write_pairs(const fs::path& root, int sources, int frames) {
  uint64_t seed = 1;
  for (int s = 0; s < sources; ++s) {
    for (int f = 0; f < frames; ++f) {
      const std::string name = "v" + std::to_string(s) + "_" + std::to_string(f) + ".png";
      save_image(root / "real" / name, random_batch(1, 8, seed++));
      save_image(root / "fake" / name, random_batch(1, 8, seed++));
    }
  }
}

std::set<std::string> source_set(const Manifest& m) {
  std::set<std::string> out;
  for (const auto& s : m.samples) out.insert(s.source_id);
  return out;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("source ids come from the stem before the last underscore") {
  CHECK(source_id_from_stem("vid_12_0003") == "vid_12");
  CHECK(source_id_from_stem("s00001_02") == "s00001");
  CHECK(source_id_from_stem("plain") == "plain");
}

TEST_CASE("manifest splits follow source fractions and stay disjoint") {
  TempDir dir("manifest");
  write_pairs(dir.path(), 10, 2);
  ManifestBuildOptions opt;
  opt.resolution = 8;
  opt.seed = 4;
  const auto set = build_manifest(dir.path(), DatasetTag::Toy, opt);
  CHECK(source_set(set.train).size() == 8);
  CHECK(source_set(set.val).size() == 1);
  CHECK(source_set(set.test).size() == 1);
  CHECK(set.train.size() == 16);
  for (const auto& id : source_set(set.val)) CHECK(source_set(set.train).count(id) == 0);
  for (const auto& id : source_set(set.test)) {
    CHECK(source_set(set.train).count(id) == 0);
    CHECK(source_set(set.val).count(id) == 0);
  }
  for (const auto& s : set.train.samples) {
    CHECK(s.real_path.filename() == s.fake_path.filename());
    CHECK(source_id_from_stem(s.real_path.stem().string()) == s.source_id);
  }
}

TEST_CASE("manifest building is deterministic and serializes byte-identically") {
  TempDir dir("manifest_det");
  write_pairs(dir.path(), 6, 1);
  ManifestBuildOptions opt;
  opt.resolution = 8;
  opt.seed = 9;
  const auto a = build_manifest(dir.path(), DatasetTag::Ffpp, opt);
  const auto b = build_manifest(dir.path(), DatasetTag::Ffpp, opt);
  CHECK(serialize_manifest(a.train) == serialize_manifest(b.train));
  CHECK(serialize_manifest(a.test) == serialize_manifest(b.test));
  write_manifest_set(dir.path(), a);
  const auto first = slurp(dir / "train.jsonl");
  write_manifest_set(dir.path(), b);
  CHECK(slurp(dir / "train.jsonl") == first);
  CHECK(first.find("\"dataset\":\"ffpp\"") != std::string::npos);

  const auto back = read_manifest(dir / "train.jsonl", Split::Train, 8);
  CHECK((back.samples == a.train.samples));
  CHECK(fs::exists(back.real_file(0)));
}

TEST_CASE("all-train fractions leave empty val and test manifests") {
  TempDir dir("manifest_all");
  write_pairs(dir.path(), 3, 1);
  ManifestBuildOptions opt;
  opt.resolution = 8;
  opt.split_fractions = {1.0, 0.0, 0.0};
  const auto set = build_manifest(dir.path(), DatasetTag::Toy, opt);
  CHECK(set.train.size() == 3);
  CHECK(set.val.empty());
  CHECK(set.test.empty());
  write_manifest_set(dir.path(), set);
  CHECK(read_manifest(dir / "test.jsonl", Split::Test, 8).empty());
}

TEST_CASE("unmatched files are listed and low-variance frames rejected") {
  TempDir dir("manifest_unmatched");
  write_pairs(dir.path(), 2, 1);
  save_image(dir / "real/lonely_0.png", random_batch(1, 8, 99));
  save_image(dir / "real/flat_0.png", ImageBatch::from_tensor(torch::full({1, 3, 8, 8}, 0.5)));
  save_image(dir / "fake/flat_0.png", ImageBatch::from_tensor(torch::full({1, 3, 8, 8}, 0.5)));
  ManifestBuildOptions opt;
  opt.resolution = 8;
  auto set = build_manifest(dir.path(), DatasetTag::Toy, opt);
  CHECK(set.unmatched == std::vector<std::string>{"lonely_0.png"});
  CHECK(set.rejected_low_variance == 1);
  CHECK(set.train.size() + set.val.size() + set.test.size() == 2);

  opt.variance_filter = false;
  set = build_manifest(dir.path(), DatasetTag::Toy, opt);
  CHECK(set.rejected_low_variance == 0);
  CHECK(set.train.size() + set.val.size() + set.test.size() == 3);
}

TEST_CASE("manifest errors") {
  TempDir dir("manifest_err");
  ManifestBuildOptions opt;
  CHECK_THROWS_AS(build_manifest(dir.path(), DatasetTag::Toy, opt), Error);
  opt.split_fractions = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(build_manifest(dir.path(), DatasetTag::Toy, opt), Error);
  { std::ofstream(dir / "dup.jsonl") << "{\"real\":\"a\",\"fake\":\"b\",\"source_id\":\"x\",\"dataset\":\"toy\"}\n"
                                     << "{\"real\":\"a\",\"fake\":\"b\",\"source_id\":\"x\",\"dataset\":\"toy\"}\n"; }
  CHECK_THROWS_AS(read_manifest(dir / "dup.jsonl", Split::Train, 8), Error);
}

TEST_CASE("toy synthesis: counts, validation, determinism") {
  TempDir dir("toy");
  ToyDatasetOptions opt;
  opt.n_pairs = 1;
  const auto m = synthesize_toy_dataset(opt, dir / "one");
  CHECK(m.size() == 1);
  int files = 0;
  for (const auto& sub : {"real", "fake"}) {
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "one" / sub)) ++files;
  }
  CHECK(files == 2);
  const auto listing = slurp(dir / "one/all.jsonl");
  CHECK(std::count(listing.begin(), listing.end(), '\n') == 1);

  opt.n_pairs = 12;
  opt.seed = 3;
  const auto a = synthesize_toy_dataset(opt, dir / "a");
  const auto b = synthesize_toy_dataset(opt, dir / "b");
  CHECK(serialize_manifest(a) == serialize_manifest(b));
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(slurp(a.real_file(i)) == slurp(b.real_file(i)));
    CHECK(slurp(a.fake_file(i)) == slurp(b.fake_file(i)));
  }
  const auto [real, fake] = render_toy_pair(opt, 5);
  CHECK(real.height() == 32);
  CHECK((real.tensor() - fake.tensor()).abs().max().item<double>() > 0.01);

  opt.resolution = 48;
  CHECK_THROWS_AS(synthesize_toy_dataset(opt, dir / "bad"), Error);
  opt.resolution = 32;
  opt.n_pairs = 0;
  CHECK_THROWS_AS(synthesize_toy_dataset(opt, dir / "bad"), Error);
}

TEST_CASE("batch iterator: sizes, coverage, determinism, pairing") {
  TempDir dir("iter");
  ToyDatasetOptions opt;
  opt.n_pairs = 10;
  const auto m = synthesize_toy_dataset(opt, dir.path());

  BatchIterator it(m, 4, 17);
  std::vector<int64_t> sizes;
  std::multiset<size_t> seen;
  std::vector<size_t> order;
  while (auto b = it.next()) {
    sizes.push_back(b->real.batch());
    for (size_t k = 0; k < b->indices.size(); ++k) {
      seen.insert(b->indices[k]);
      order.push_back(b->indices[k]);
      CHECK(b->source_ids[k] == m.samples[b->indices[k]].source_id);
    }
  }
  CHECK(sizes == std::vector<int64_t>{4, 4, 2});
  CHECK(seen.size() == 10);
  CHECK(std::set<size_t>(seen.begin(), seen.end()).size() == 10);

  BatchIterator again(m, 4, 17);
  std::vector<size_t> order2;
  while (auto b = again.next()) order2.insert(order2.end(), b->indices.begin(), b->indices.end());
  CHECK(order == order2);

  // Aligned pairs: the fake tensor is the fake frame of the same line.
  BatchIterator plain(m, 3, std::nullopt);
  const auto first = *plain.next();
  CHECK(first.indices == std::vector<size_t>{0, 1, 2});
  CHECK(torch::equal(first.fake.slice(1).tensor(), load_image(m.fake_file(1)).tensor()));

  // Cycling rolls into a new, differently shuffled epoch.
  BatchIterator cyc(m, 10, 17);
  const auto e0 = cyc.next_cycling().indices;
  const auto e1 = cyc.next_cycling().indices;
  CHECK(cyc.epoch() == 1);
  CHECK(std::multiset<size_t>(e1.begin(), e1.end()).size() == 10);
  CHECK(e0 != e1);
}

TEST_CASE("batch iterator skips undecodable samples and counts them") {
  TempDir dir("iter_skip");
  ToyDatasetOptions opt;
  opt.n_pairs = 5;
  const auto m = synthesize_toy_dataset(opt, dir.path());
  { std::ofstream(m.fake_file(2), std::ios::trunc) << "garbage"; }
  BatchIterator it(m, 8, std::nullopt);
  const auto b = *it.next();
  CHECK(b.real.batch() == 4);
  CHECK(it.skipped() == 1);
  CHECK_THROWS_AS(BatchIterator(m, 0, std::nullopt), Error);
}

}  // TEST_SUITE
