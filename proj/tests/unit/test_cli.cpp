#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "sharpmask/commands.hpp"
#include "sharpmask/config.hpp"
#include "sharpmask/error.hpp"
#include "test_support.hpp"

using namespace sharpmask;
using sharpmask::test::TempDir;

namespace {

struct Captured {
  int status = 0;
  std::string output;
};

Captured run_cli(const std::string& args) {
  const std::string cmd = std::string(SHARPMASK_CLI) + " " + args + " 2>&1";
  Captured c;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 512> buf{};
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) c.output += buf.data();
  const int raw = pclose(pipe);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults resolve for both profiles") {
  ConfigSources s;
  const auto toy = resolve_config(s);
  CHECK(toy.profile == Profile::Toy);
  CHECK(toy.dataset.resolution == 32);
  CHECK(toy.resolved.at("profile") == "toy");

  s.overrides = {"profile=full"};
  const auto full = resolve_config(s);
  CHECK(full.profile == Profile::Full);
  CHECK(full.dataset.resolution == 256);
  CHECK(full.train.steps_fdn == 200000);
}

TEST_CASE("all unknown keys are reported in one error") {
  ConfigSources s;
  s.file = nlohmann::json{{"train", {{"alpah", 1}}}, {"bogus", 2}};
  s.overrides = {"model.g1.widht=3"};
  try {
    resolve_config(s);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    const auto& k = e.keys();
    for (const char* key : {"train.alpah", "bogus", "model.g1.widht"}) {
      CHECK(std::find(k.begin(), k.end(), key) != k.end());
    }
  }
}

TEST_CASE("type and range errors name their keys") {
  ConfigSources s;
  s.overrides = {"train.alpha=-1", "dataset.resolution=\"big\"", "sharpen.threshold=2"};
  try {
    resolve_config(s);
    FAIL("expected validation error");
  } catch (const Error& e) {
    const auto& k = e.keys();
    for (const char* key : {"train.alpha", "dataset.resolution", "sharpen.threshold"}) {
      CHECK(std::find(k.begin(), k.end(), key) != k.end());
    }
    CHECK(std::string(e.what()).rfind("invalid configuration: ", 0) == 0);
  }
}

TEST_CASE("overrides win over the file and are recorded in the resolved config") {
  ConfigSources s;
  s.file = nlohmann::json{{"train", {{"alpha", 10}}}};
  s.overrides = {"train.alpha=50"};
  const auto c = resolve_config(s);
  CHECK(c.train.alpha == 50.0);
  CHECK(c.resolved.at("train").at("alpha") == 50);
  const auto again = parse_config(c.resolved);
  CHECK(again.resolved == c.resolved);
}

TEST_CASE("environment profile forces toy and rejects anything else") {
  ConfigSources s;
  s.overrides = {"profile=full"};
  s.env_profile = "TOY";
  CHECK(resolve_config(s).profile == Profile::Toy);
  s.env_profile = "full";
  CHECK_THROWS_AS(resolve_config(s), Error);
}

TEST_CASE("external detectors need weights") {
  ConfigSources s;
  s.overrides = {"detectors.names=[\"toy_cnn\",\"resnet50\"]"};
  try {
    resolve_config(s);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.keys().front() == "detectors.weights.resnet50");
  }
}

TEST_CASE("train-ven without an FDN checkpoint names the missing key") {
  TempDir dir("cli_ven");
  CommandContext ctx{resolve_config({}), dir.path()};
  try {
    run_train_ven(ctx);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(e.keys() == std::vector<std::string>{"train.fdn_checkpoint"});
  }
}

TEST_CASE("invalid config file is a validation error") {
  TempDir dir("cli_file");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(read_config_file(dir / "bad.json"), Error);
}

TEST_CASE("the binary prints one structured error line and exits 2") {
  TempDir dir("cli_proc");
  const auto r = run_cli("train-ven --out " + (dir / "run").string() + " --set train.alpah=1");
  CHECK(r.status == 2);
  CHECK(r.output.find("sharpmask: error: kind=validation keys=train.alpah msg=\"") != std::string::npos);

  const auto missing = run_cli("train-ven --out " + (dir / "run").string());
  CHECK(missing.status == 2);
  CHECK(missing.output.find("keys=train.fdn_checkpoint") != std::string::npos);

  const auto usage = run_cli("no-such-command");
  CHECK(usage.status == 2);
  CHECK(usage.output.find("kind=usage") != std::string::npos);

  const auto help = run_cli("--help");
  CHECK(help.status == 0);
  CHECK(help.output.find("toy-e2e") != std::string::npos);
}

}  // TEST_SUITE
