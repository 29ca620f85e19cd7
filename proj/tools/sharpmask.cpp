// Command-line front end: one subcommand per pipeline stage plus toy-e2e.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "sharpmask/commands.hpp"
#include "sharpmask/config.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/runtime.hpp"

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': break;
      default: out += c;
    }
  }
  return out;
}

int fail(const std::string& kind, const std::vector<std::string>& keys, const std::string& msg,
         int code) {
  std::string joined;
  for (const auto& k : keys) joined += (joined.empty() ? "" : ",") + k;
  std::cerr << "sharpmask: error: kind=" << kind << " keys=" << (joined.empty() ? "-" : joined)
            << " msg=\"" << escape(msg) << "\"" << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharpening-based DeepFake anti-forensics pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out = "sharpmask_out";
  std::optional<uint64_t> seed;
  std::optional<int64_t> workers;
  bool force = false;
  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "dotted.key=value override (repeatable)");
  app.add_option("--out", out, "run directory")->capture_default_str();
  app.add_option("--seed", seed, "sets dataset.seed, train.seed and detectors.seed");
  app.add_option("--workers", workers, "attack worker threads (attack.workers)");
  app.add_flag("--force", force, "accept mismatched checkpoints (attack.force)");
  app.fallthrough();

  const char* help[] = {
      "render toy data or index a dataset root and write split manifests",
      "train built-in detectors and score every configured detector on TEST",
      "train the forensics-deceiving network (G1 vs D1)",
      "train the visual-enhancement network (G2 vs D2) against a frozen G1",
      "run FDN (and VEN when attack.g2_checkpoint is set) over the TEST fakes",
      "score detectors and image quality over every image family",
      "emit report.md, report.csv and report.json from evaluation.json",
      "prepare-data, train-detectors, train-fdn, train-ven, attack, evaluate, report"};
  const auto names = sharpmask::subcommand_names();
  for (size_t i = 0; i < names.size(); ++i) app.add_subcommand(names[i], help[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", {}, e.what(), 2);
  }

  try {
    sharpmask::configure_runtime();
    sharpmask::ConfigSources sources;
    if (!config_path.empty()) sources.file = sharpmask::read_config_file(config_path);
    sources.overrides = overrides;
    if (seed) {
      for (const char* key : {"dataset.seed", "train.seed", "detectors.seed"}) {
        sources.overrides.push_back(std::string(key) + "=" + std::to_string(*seed));
      }
    }
    if (workers) sources.overrides.push_back("attack.workers=" + std::to_string(*workers));
    if (force) sources.overrides.push_back("attack.force=true");
    if (const char* env = std::getenv("SHARPMASK_PROFILE")) sources.env_profile = env;

    sharpmask::CommandContext ctx{sharpmask::resolve_config(sources), out};
    sharpmask::run_subcommand(app.get_subcommands().front()->get_name(), ctx);
    return 0;
  } catch (const sharpmask::Error& e) {
    const bool validation = e.kind() == sharpmask::ErrorKind::Validation;
    return fail(std::string(sharpmask::to_string(e.kind())), e.keys(), e.what(), validation ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("internal", {}, e.what(), 1);
  }
}
