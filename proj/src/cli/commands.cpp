#include "sharpmask/commands.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include "sharpmask/attack.hpp"
#include "sharpmask/codec.hpp"
#include "sharpmask/detectors.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/report.hpp"
#include "sharpmask/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sharpmask {

RunLayout::RunLayout(fs::path out_dir, const ExperimentConfig& config)
    : out(std::move(out_dir)), data(config.dataset.root.value_or(out / "data")) {}

fs::path RunLayout::split_manifest(Split split) const {
  return data / (std::string(to_string(split)) + ".jsonl");
}

namespace {

std::string lower_stage(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s + "_digest";
}

void log_line(const std::string& text) { std::cerr << "sharpmask: " << text << '\n'; }

Manifest load_split(const CommandContext& ctx, Split split) {
  const RunLayout layout(ctx.out, ctx.config);
  const auto file = layout.split_manifest(split);
  if (!fs::exists(file)) {
    throw Error(ErrorKind::Io, "missing manifest " + file.string() + " (run prepare-data first)");
  }
  return read_manifest(file, split, ctx.config.dataset.resolution);
}

StageOutputs stage_outputs(const RunLayout& layout) {
  return {layout.checkpoints(), layout.logs(), layout.samples()};
}

void require_path(const std::optional<fs::path>& value, const std::string& key,
                  const std::string& command) {
  if (!value) {
    throw Error(ErrorKind::Validation, key + " is required by " + command, {key});
  }
}

AttackOptions attack_options(const CommandContext& ctx) {
  AttackOptions o;
  o.out_dir = ctx.out;
  o.batch_size = ctx.config.attack.batch_size;
  o.workers = ctx.config.attack.workers;
  o.resume_from = static_cast<size_t>(ctx.config.attack.resume_from);
  o.force = ctx.config.attack.force;
  return o;
}

}  // namespace

void run_prepare_data(const CommandContext& ctx) {
  const auto& ds = ctx.config.dataset;
  const RunLayout layout(ctx.out, ctx.config);
  if (ds.tag == DatasetTag::Toy) {
    ToyDatasetOptions toy;
    toy.n_pairs = ds.toy_pairs;
    toy.resolution = ds.resolution;
    toy.seed = ds.seed;
    toy.frames_per_source = ds.frames_per_source;
    synthesize_toy_dataset(toy, layout.data);
    log_line("rendered " + std::to_string(ds.toy_pairs) + " toy pairs into " + layout.data.string());
  } else if (!fs::is_directory(layout.data / "real") || !fs::is_directory(layout.data / "fake")) {
    throw Error(ErrorKind::Validation,
                "dataset.root must contain real/ and fake/ frame directories", {"dataset.root"});
  }
  ManifestBuildOptions options;
  options.split_fractions = ds.splits;
  options.seed = ds.seed;
  options.resolution = ds.resolution;
  options.variance_filter = ds.variance_filter;
  options.variance_floor = ds.variance_floor;
  const auto set = build_manifest(layout.data, ds.tag, options);
  write_manifest_set(layout.data, set);
  log_line("manifests: train " + std::to_string(set.train.size()) + ", val " +
           std::to_string(set.val.size()) + ", test " + std::to_string(set.test.size()) +
           " pairs; " + std::to_string(set.unmatched.size()) + " unmatched, " +
           std::to_string(set.rejected_low_variance) + " low-variance rejected");
}

void run_train_detectors(const CommandContext& ctx) {
  const RunLayout layout(ctx.out, ctx.config);
  const auto train = load_split(ctx, Split::Train);
  const auto test = load_split(ctx, Split::Test);
  const auto& cfg = ctx.config.detectors;
  json summary = json::object();
  for (const auto& name : cfg.names) {
    if (DetectorRegistry::instance().find(name) == DetectorKind::TorchScript) {
      auto det = DetectorRegistry::instance().load(name, cfg.weights.at(name));
      summary[name] = {{"trained", false}, {"test", evaluate_detector(*det, test)}};
      continue;
    }
    DetectorTrainConfig dc;
    dc.steps = cfg.steps;
    dc.batch_size = cfg.batch_size;
    dc.learning_rate = cfg.learning_rate;
    dc.seed = cfg.seed;
    dc.architecture = cfg.architecture;
    const auto result = train_detector(name, dc, train, test);
    save_checkpoint(layout.detector_checkpoint(name), result.checkpoint);
    json history = json::array();
    for (size_t s = 0; s < result.loss_history.size(); ++s) {
      history.push_back({{"step", s + 1}, {"loss", result.loss_history[s]}});
    }
    fs::create_directories(layout.logs());
    {
      std::ofstream out(layout.logs() / ("detector_" + name + "_loss.jsonl"),
                        std::ios::binary | std::ios::trunc);
      for (const auto& h : history) out << h.dump() << '\n';
    }
    summary[name] = {{"trained", true}, {"test", result.test_metrics}};
    log_line("detector " + name + ": test accuracy " + std::to_string(result.test_metrics.accuracy));
  }
  write_json_file(ctx.out / "detectors.json", summary);
}

void run_train_fdn(const CommandContext& ctx) {
  const RunLayout layout(ctx.out, ctx.config);
  const auto train = load_split(ctx, Split::Train);
  const auto result =
      train_fdn(ctx.config.train, ctx.config.model, train, ctx.config.sharpen, stage_outputs(layout));
  const auto& last = result.history.back();
  log_line("fdn: " + std::to_string(result.history.size()) + " steps, final total " +
           std::to_string(last.total) + ", G1 digest " + result.g1.digest.substr(0, 12));
}

void run_train_ven(const CommandContext& ctx) {
  require_path(ctx.config.fdn_checkpoint, "train.fdn_checkpoint", "train-ven");
  const RunLayout layout(ctx.out, ctx.config);
  const auto train = load_split(ctx, Split::Train);
  const auto result = train_ven(ctx.config.train, ctx.config.model, train, ctx.config.sharpen,
                                *ctx.config.fdn_checkpoint, stage_outputs(layout));
  log_line("ven: " + std::to_string(result.history.size()) + " steps, final total " +
           std::to_string(result.history.back().total) + ", frozen G1 " +
           result.g1_digest.substr(0, 12));
}

void run_attack(const CommandContext& ctx) {
  const auto& att = ctx.config.attack;
  require_path(att.g1_checkpoint, "attack.g1_checkpoint", "attack");
  const auto test = load_split(ctx, Split::Test);
  const auto options = attack_options(ctx);
  const auto fdn = attack_fdn(*att.g1_checkpoint, test, ctx.config.sharpen, options);
  log_line("attack fdn: " + std::to_string(fdn.records.size()) + " frames");
  if (att.g2_checkpoint) {
    const auto ven = attack_ven(*att.g2_checkpoint, *att.g1_checkpoint, test, ctx.config.sharpen, options);
    log_line("attack ven: " + std::to_string(ven.records.size()) + " frames");
  }
}

void run_evaluate(const CommandContext& ctx) {
  const RunLayout layout(ctx.out, ctx.config);
  const auto test = load_split(ctx, Split::Test);
  const auto& cfg = ctx.config;
  EvaluateOptions options;
  options.attack_dir = cfg.eval.attack_dir.value_or(ctx.out);
  for (const auto& name : cfg.detectors.names) {
    const bool external = DetectorRegistry::instance().find(name) == DetectorKind::TorchScript;
    options.detectors.push_back(
        {name, external ? cfg.detectors.weights.at(name) : layout.detector_checkpoint(name)});
  }
  for (const auto& [name, dir] : cfg.eval.external_methods) options.external_methods.push_back({name, dir});
  options.face_detector = cfg.eval.face_detector;
  options.sharpen = cfg.sharpen;
  options.batch_size = cfg.eval.batch_size;
  options.metadata = {{"profile", std::string(to_string(cfg.profile))},
                      {"dataset_seed", cfg.dataset.seed},
                      {"train_seed", cfg.train.seed},
                      {"detector_seed", cfg.detectors.seed},
                      {"resolution", cfg.dataset.resolution}};
  const auto run_file = options.attack_dir / "run.json";
  if (fs::exists(run_file)) {
    const auto run = read_json_file(run_file);
    for (const char* stage : {"fdn", "ven"}) {
      if (!run.contains(stage)) continue;
      for (const auto& c : run.at(stage).at("checkpoints")) {
        options.metadata[std::string(stage) + "_" + lower_stage(c.at("stage").get<std::string>())] =
            c.at("digest");
      }
    }
  }
  const auto report = evaluate(test, options);
  write_json_file(ctx.out / "evaluation.json", report);
  log_line("evaluated " + std::to_string(test.size()) + " test frames");
}

void run_report(const CommandContext& ctx) {
  const auto file = ctx.out / "evaluation.json";
  if (!fs::exists(file)) {
    throw Error(ErrorKind::Io, "missing " + file.string() + " (run evaluate first)");
  }
  emit_report(read_json_file(file).get<EvalReport>(), ctx.out);
  log_line("wrote report.md, report.csv, report.json into " + ctx.out.string());
}

void run_toy_e2e(const CommandContext& ctx) {
  const RunLayout layout(ctx.out, ctx.config);
  run_prepare_data(ctx);
  run_train_detectors(ctx);
  run_train_fdn(ctx);

  CommandContext chained = ctx;
  chained.config.fdn_checkpoint = layout.checkpoints() / "fdn_g1.ckpt";
  run_train_ven(chained);
  chained.config.attack.g1_checkpoint = layout.checkpoints() / "fdn_g1.ckpt";
  chained.config.attack.g2_checkpoint = layout.checkpoints() / "ven_g2.ckpt";
  run_attack(chained);
  run_evaluate(chained);
  run_report(chained);
}

void write_run_metadata(const CommandContext& ctx) {
  fs::create_directories(ctx.out);
  write_json_file(ctx.out / "resolved_config.json", ctx.config.resolved);
  json digests = json::object();
  const auto dir = ctx.out / "checkpoints";
  if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".ckpt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto ckpt = load_checkpoint(f);
      digests[f.filename().string()] = {{"stage", std::string(to_string(ckpt.stage))},
                                        {"sha256", ckpt.digest}};
    }
  }
  write_json_file(ctx.out / "digests.json", digests);
}

std::vector<std::string> subcommand_names() {
  return {"prepare-data", "train-detectors", "train-fdn", "train-ven",
          "attack",       "evaluate",        "report",    "toy-e2e"};
}

void run_subcommand(const std::string& name, const CommandContext& ctx) {
  fs::create_directories(ctx.out);
  write_json_file(ctx.out / "resolved_config.json", ctx.config.resolved);
  if (name == "prepare-data") {
    run_prepare_data(ctx);
  } else if (name == "train-detectors") {
    run_train_detectors(ctx);
  } else if (name == "train-fdn") {
    run_train_fdn(ctx);
  } else if (name == "train-ven") {
    run_train_ven(ctx);
  } else if (name == "attack") {
    run_attack(ctx);
  } else if (name == "evaluate") {
    run_evaluate(ctx);
  } else if (name == "report") {
    run_report(ctx);
  } else if (name == "toy-e2e") {
    run_toy_e2e(ctx);
  } else {
    throw Error(ErrorKind::Validation, "unknown subcommand '" + name + "'");
  }
  write_run_metadata(ctx);
}

}  // namespace sharpmask
