#include <doctest.h>

#include <fstream>
#include <sstream>

#include "sharpmask/attack.hpp"
#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/models.hpp"
#include "test_support.hpp"

using namespace sharpmask;
using sharpmask::test::TempDir;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Fixture {
  TempDir dir{"attack"};
  Manifest manifest;
  fs::path g1_path;
  fs::path g2_path;
  std::string g1_digest;

  Fixture() {
    ToyDatasetOptions opt;
    opt.n_pairs = 6;
    manifest = synthesize_toy_dataset(opt, dir / "data");
    torch::manual_seed(21);
    GeneratorG1 g1(G1Config{});
    GeneratorG2 g2(G2Config{});  // identity at init
    const auto g1_ckpt = capture_checkpoint(*g1, StageTag::FdnG1, g1->config(), {});
    g1_digest = g1_ckpt.digest;
    g1_path = dir / "g1.ckpt";
    g2_path = dir / "g2.ckpt";
    save_checkpoint(g1_path, g1_ckpt);
    save_checkpoint(g2_path, capture_checkpoint(*g2, StageTag::VenG2, g2->config(),
                                                {{"fdn_g1_digest", g1_digest}, {"ven_order", "g2_g1"}}));
  }

  AttackOptions options(const std::string& sub) const {
    AttackOptions o;
    o.out_dir = dir / sub;
    o.batch_size = 4;
    return o;
  }
};

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("empty manifest gives an empty run") {
  Fixture f;
  Manifest empty = f.manifest;
  empty.samples.clear();
  const auto run = attack_fdn(f.g1_path, empty, SharpenParams{}, f.options("empty"));
  CHECK(run.records.empty());
  CHECK(fs::exists(f.dir / "empty/run.json"));
}

TEST_CASE("FDN attack writes images, raw masks and visualizations deterministically") {
  Fixture f;
  const auto a = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, f.options("a"));
  const auto b = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, f.options("b"));
  REQUIRE(a.records.size() == f.manifest.size());
  CHECK(a.stage == "fdn");
  CHECK(a.checkpoints.size() == 1);
  CHECK(a.checkpoints[0].digest == f.g1_digest);
  for (const auto& r : a.records) {
    CHECK(slurp(f.dir / "a" / r.image) == slurp(f.dir / "b" / r.image));
    CHECK(slurp(f.dir / "a" / r.mask_raw) == slurp(f.dir / "b" / r.mask_raw));
    CHECK(fs::exists(f.dir / "a" / r.mask_vis));
    CHECK(r.stats.mean_abs > 0.0);
  }
  const auto run = read_json_file(f.dir / "a/run.json");
  CHECK(run.contains("fdn"));
  CHECK(run.at("fdn").at("records").size() == f.manifest.size());
}

TEST_CASE("reconstruction identity: I_f + m reproduces the emitted image") {
  Fixture f;
  const auto run = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, f.options("rec"));
  for (const auto& r : run.records) {
    const auto base = load_image(f.manifest.fake_file(r.line));
    const auto mask = load_npy(f.dir / "rec" / r.mask_raw);
    const auto emitted = load_image(f.dir / "rec" / r.image);
    const auto rebuilt = base.tensor().to(torch::kDouble) + mask;
    CHECK((rebuilt - emitted.tensor().to(torch::kDouble)).abs().max().item<double>() <= 1.0 / 255.0);
  }
}

TEST_CASE("identity G2 makes VEN outputs equal FDN outputs bit-exactly") {
  Fixture f;
  const auto fdn = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, f.options("both"));
  const auto ven = attack_ven(f.g2_path, f.g1_path, f.manifest, SharpenParams{}, f.options("both"));
  REQUIRE(ven.records.size() == fdn.records.size());
  CHECK(ven.checkpoints.size() == 2);
  CHECK(ven.checkpoints[0].stage == "VEN_G2");
  CHECK(ven.checkpoints[1].digest == f.g1_digest);
  for (size_t i = 0; i < ven.records.size(); ++i) {
    CHECK(slurp(f.dir / "both" / ven.records[i].image) == slurp(f.dir / "both" / fdn.records[i].image));
    CHECK(slurp(f.dir / "both" / ven.records[i].mask_raw) ==
          slurp(f.dir / "both" / fdn.records[i].mask_raw));
  }
  const auto run = read_json_file(f.dir / "both/run.json");
  CHECK(run.contains("fdn"));
  CHECK(run.contains("ven"));
}

TEST_CASE("workers and resume do not change outputs") {
  Fixture f;
  auto one = f.options("w1");
  one.batch_size = 1;
  auto many = f.options("w3");
  many.workers = 3;
  many.batch_size = 1;
  const auto a = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, one);
  const auto b = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, many);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].line == b.records[i].line);
    CHECK(slurp(f.dir / "w1" / a.records[i].image) == slurp(f.dir / "w3" / b.records[i].image));
  }
  CHECK(a.magnitude_histogram == b.magnitude_histogram);

  auto resumed = f.options("w1");
  resumed.resume_from = 4;
  const auto tail = attack_fdn(f.g1_path, f.manifest, SharpenParams{}, resumed);
  CHECK(tail.records.size() == f.manifest.size() - 4);
  CHECK(tail.records.front().line == 4);
}

TEST_CASE("stage tags and G1 provenance are enforced") {
  Fixture f;
  CHECK_THROWS_AS(attack_fdn(f.g2_path, f.manifest, SharpenParams{}, f.options("x")), Error);

  torch::manual_seed(99);
  GeneratorG1 other(G1Config{});
  const auto other_path = f.dir / "other_g1.ckpt";
  save_checkpoint(other_path, capture_checkpoint(*other, StageTag::FdnG1, other->config(), {}));
  try {
    attack_ven(f.g2_path, other_path, f.manifest, SharpenParams{}, f.options("mix"));
    FAIL("expected checkpoint-mixing refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Contract);
  }
  auto forced = f.options("mix");
  forced.force = true;
  const auto run = attack_ven(f.g2_path, other_path, f.manifest, SharpenParams{}, forced);
  REQUIRE_FALSE(run.warnings.empty());
  CHECK(run.warnings.front().find("checkpoint mixing") != std::string::npos);
}

}  // TEST_SUITE
