// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every selected criterion passes. `acceptance 1 2 3` runs a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "oracles.hpp"
#include "sharpmask/codec.hpp"
#include "sharpmask/config.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/imaging.hpp"
#include "sharpmask/losses.hpp"
#include "sharpmask/metrics.hpp"
#include "sharpmask/report.hpp"
#include "sharpmask/runtime.hpp"
#include "sharpmask/training.hpp"

namespace fs = std::filesystem;
using namespace sharpmask;

namespace {

// Pinned tolerances and budgets.
constexpr double kUsmTol = 1e-6;
constexpr double kPsnrTol = 1e-9;
constexpr double kSsimTol = 1e-7;
constexpr double kGradRelTol = 1e-4;
constexpr double kFdStep = 1e-6;
constexpr int kVenSteps = 100;
constexpr double kMinPrecisionF = 0.95;
constexpr double kMaxRatioS = 0.50;
constexpr double kMinRatioFu = 0.90;
constexpr double kBudgetUsm = 10.0;
constexpr double kBudgetMetrics = 10.0;
constexpr double kBudgetGrad = 60.0;
constexpr double kBudgetFreeze = 300.0;
constexpr double kBudgetToy = 900.0;
const std::vector<uint64_t> kSeeds = {0, 1, 2};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

torch::Tensor uniform(std::vector<int64_t> shape, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return at::rand(shape, gen, torch::TensorOptions().dtype(torch::kDouble)) * (hi - lo) + lo;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

Outcome usm_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  bool identity = true;
  for (uint64_t trial = 0; trial < 100; ++trial) {
    const auto img = ImageBatch::from_tensor(uniform({1, 3, 16, 16}, 1000 + trial));
    const auto got = unsharp_mask(img, SharpenParams{}).tensor().to(torch::kDouble);
    const auto want = sharpmask::test::dense_usm_oracle(img.tensor(), 1.0, 0.8);
    worst = std::max(worst, (got - want).abs().max().item<double>());
    SharpenParams off;
    off.amount = 0.0;
    identity = identity && torch::equal(unsharp_mask(img, off).tensor(), img.tensor());
  }
  const double t = seconds_since(t0);
  return {worst <= kUsmTol && identity && t < kBudgetUsm,
          "100 trials 16x16, max_abs_err=" + fmt(worst) + " (tol " + fmt(kUsmTol) +
              "), amount=0 identity " + (identity ? "exact" : "BROKEN") + ", " + fmt(t, "%.2f") +
              " s (limit " + fmt(kBudgetUsm) + " s)"};
}

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  double psnr_err = 0.0;
  double ssim_err = 0.0;
  for (uint64_t trial = 0; trial < 10; ++trial) {
    const auto a = uniform({1, 3, 32, 32}, 2000 + trial);
    const auto b = (a + uniform({1, 3, 32, 32}, 3000 + trial, -0.1, 0.1)).clamp(0, 1);
    const auto ia = ImageBatch::from_tensor(a);
    const auto ib = ImageBatch::from_tensor(b);
    psnr_err = std::max(psnr_err, std::abs(psnr(ia, ib).front() - sharpmask::test::psnr_oracle(a, b)));
    ssim_err = std::max(ssim_err, std::abs(ssim(ia, ib).front() - sharpmask::test::ssim_oracle(a, b)));
  }
  const auto same = ImageBatch::from_tensor(uniform({1, 3, 32, 32}, 7));
  const double self_ssim = ssim(same, same).front();
  const double self_psnr = psnr(same, same).front();
  const auto p = prediction_precision(std::vector<Label>{Label::Fake, Label::Fake, Label::Real, Label::Fake});
  const bool fixtures = std::abs(self_ssim - 1.0) <= 1e-12 && self_psnr == kPsnrIdentical && p &&
                        *p == 0.75 && !prediction_precision(std::vector<Label>{}).has_value();
  const double t = seconds_since(t0);
  return {psnr_err <= kPsnrTol && ssim_err <= kSsimTol && fixtures && t < kBudgetMetrics,
          "psnr_err=" + fmt(psnr_err) + " dB (tol " + fmt(kPsnrTol) + "), ssim_err=" + fmt(ssim_err) +
              " (tol " + fmt(kSsimTol) + "), ssim(a,a)=" + fmt(self_ssim, "%.12g") +
              ", psnr(a,a)=" + fmt(self_psnr) + ", precision(3/4)=" + (p ? fmt(*p) : "N/A") + ", " +
              fmt(t, "%.2f") + " s (limit " + fmt(kBudgetMetrics) + " s)"};
}

// Central differences of a scalar function of `vars` against autograd.
double fd_relative_error(const std::function<torch::Tensor(const std::vector<torch::Tensor>&)>& f,
                         std::vector<torch::Tensor> vars) {
  for (auto& v : vars) v = v.clone().set_requires_grad(true);
  f(vars).backward();
  double num = 0.0;
  double den_a = 0.0;
  double den_n = 0.0;
  torch::NoGradGuard no_grad;
  for (auto& v : vars) {
    const auto analytic = v.grad().clone();
    auto flat = v.view({-1});
    for (int64_t i = 0; i < flat.numel(); ++i) {
      const double orig = flat[i].item<double>();
      flat[i] = orig + kFdStep;
      const double up = f(vars).item<double>();
      flat[i] = orig - kFdStep;
      const double down = f(vars).item<double>();
      flat[i] = orig;
      const double numeric = (up - down) / (2.0 * kFdStep);
      const double a = analytic.view({-1})[i].item<double>();
      num += (a - numeric) * (a - numeric);
      den_a += a * a;
      den_n += numeric * numeric;
    }
  }
  return std::sqrt(num) / std::max({std::sqrt(den_a), std::sqrt(den_n), 1e-12});
}

// Target kept at least 0.05 away from the output so |x - y| stays differentiable.
torch::Tensor offset_target(const torch::Tensor& x, uint64_t seed) {
  const auto mag = uniform(x.sizes().vec(), seed, 0.05, 0.15);
  const auto sign = torch::where(uniform(x.sizes().vec(), seed + 1) > 0.5, 1.0, -1.0);
  return x + sign * mag;
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  const auto scores_a = uniform({2, 1, 4, 4}, 41, 0.1, 0.9);
  const auto scores_b = uniform({2, 1, 4, 4}, 42, 0.1, 0.9);
  const auto img = uniform({2, 3, 4, 4}, 43, 0.2, 0.8);
  const auto target = offset_target(img, 44);
  const double weight = 100.0;

  std::map<std::string, double> err;
  err["g1"] = fd_relative_error(
      [&](const auto& v) { return loss_g1(v[0], v[1], target, weight).total; }, {scores_a, img});
  err["g2"] = fd_relative_error(
      [&](const auto& v) { return loss_g2(v[0], v[1], target, weight).total; }, {scores_a, img});
  err["d1"] = fd_relative_error([&](const auto& v) { return loss_d1(v[0], v[1]); }, {scores_a, scores_b});
  err["d2"] = fd_relative_error([&](const auto& v) { return loss_d2(v[0], v[1]); }, {scores_a, scores_b});

  // Values against the written-out formulas.
  const double g1_expected = (-scores_a.log()).mean().item<double>() +
                             weight * (img - target).abs().mean().item<double>();
  const double d_expected =
      (-scores_b.log()).mean().item<double>() + (-(1.0 - scores_a).log()).mean().item<double>();
  const double value_err =
      std::max(std::abs(loss_g1(scores_a, img, target, weight).total.item<double>() - g1_expected),
               std::abs(loss_d1(scores_a, scores_b).item<double>() - d_expected));

  double worst = value_err > 1e-12 ? INFINITY : 0.0;
  std::string parts;
  for (const auto& [name, e] : err) {
    worst = std::max(worst, e);
    parts += name + "=" + fmt(e) + " ";
  }
  const double t = seconds_since(t0);
  return {worst < kGradRelTol && t < kBudgetGrad,
          "relative errors " + parts + "(tol " + fmt(kGradRelTol) + "), value_err=" + fmt(value_err) +
              ", 4x4 double, " + fmt(t, "%.2f") + " s (limit " + fmt(kBudgetGrad) + " s)"};
}

Outcome freeze_contracts(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto cfg = resolve_config({});
  ToyDatasetOptions toy;
  toy.n_pairs = 256;
  toy.resolution = cfg.dataset.resolution;
  const auto manifest = synthesize_toy_dataset(toy, work / "freeze_data");
  torch::manual_seed(cfg.train.seed);

  FdnTrainer fdn(cfg.train, cfg.model, cfg.sharpen);
  BatchIterator fdn_batches(manifest, cfg.train.batch_size, 3);
  for (int i = 0; i < 10; ++i) {
    const auto b = fdn_batches.next_cycling();
    fdn.step(b.real, b.fake);
  }
  const auto g1_ckpt = fdn.g1_checkpoint();

  VenTrainer ven(cfg.train, cfg.model, cfg.sharpen, g1_ckpt);
  BatchIterator batches(manifest, cfg.train.batch_size, 4);
  const auto first = batches.next_cycling();
  auto reference_g1 = restore_g1(g1_ckpt);
  bool bit_identical = false;
  {
    torch::NoGradGuard no_grad;
    bit_identical = torch::equal(ven.compose(first.fake.tensor()),
                                 g1_forward(reference_g1, first.fake).tensor());
  }
  double min_grad = INFINITY;
  ven.step(first.fake);
  min_grad = std::min(min_grad, ven.last_g2_grad_norm());
  for (int s = 1; s < kVenSteps; ++s) {
    ven.step(batches.next_cycling().fake);
    min_grad = std::min(min_grad, ven.last_g2_grad_norm());
  }
  const auto digest_after = parameter_digest(*ven.g1());
  const bool unchanged = digest_after == g1_ckpt.digest;
  const double t = seconds_since(t0);
  return {unchanged && bit_identical && min_grad > 0.0 && t < kBudgetFreeze,
          std::to_string(ven.steps_done()) + " VEN steps, G1 digest " +
              (unchanged ? "unchanged" : "CHANGED") + ", step-0 output " +
              (bit_identical ? "bit-identical" : "DIFFERENT") + ", min |grad G2|=" + fmt(min_grad) +
              ", " + fmt(t, "%.1f") + " s (limit " + fmt(kBudgetFreeze) + " s)"};
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SHARPMASK_CLI) + " " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

struct ToyRun {
  fs::path dir;
  bool ok = false;
  EvalReport report;
};

struct ToySuite {
  std::vector<ToyRun> runs;
  double seconds = 0.0;
};

ToySuite& toy_suite(const fs::path& work) {
  static std::optional<ToySuite> suite;
  if (suite) return *suite;
  suite.emplace();
  const auto t0 = Clock::now();
  for (uint64_t seed : kSeeds) {
    ToyRun run;
    run.dir = work / ("toy_seed" + std::to_string(seed));
    fs::remove_all(run.dir);
    fs::create_directories(run.dir);
    const int status = run_cli("toy-e2e --out \"" + run.dir.string() + "\" --seed " + std::to_string(seed),
                               run.dir / "cli.log");
    run.ok = status == 0 && fs::exists(run.dir / "evaluation.json");
    if (run.ok) run.report = read_json_file(run.dir / "evaluation.json").get<EvalReport>();
    suite->runs.push_back(std::move(run));
  }
  suite->seconds = seconds_since(t0);
  return *suite;
}

std::optional<double> precision_of(const EvalReport& r, const std::string& family) {
  const auto* cell = r.precision("toy_cnn", family);
  return cell ? cell->precision : std::nullopt;
}

Outcome toy_undetectability(const fs::path& work) {
  const auto& suite = toy_suite(work);
  std::vector<double> pf, ratio_s, ratio_fu;
  for (const auto& run : suite.runs) {
    if (!run.ok) return {false, "toy-e2e failed, see " + (run.dir / "cli.log").string()};
    const auto f = precision_of(run.report, "I_f");
    const auto s = precision_of(run.report, "I_s");
    const auto fu = precision_of(run.report, "I_fu");
    if (!f || !s || !fu || *f == 0.0) return {false, "missing precision cells in " + run.dir.string()};
    pf.push_back(*f);
    ratio_s.push_back(*s / *f);
    ratio_fu.push_back(*fu / *f);
  }
  const double mf = median(pf), ms = median(ratio_s), mfu = median(ratio_fu);
  std::string per_seed;
  for (size_t i = 0; i < pf.size(); ++i) {
    per_seed += " [seed " + std::to_string(kSeeds[i]) + ": P(I_f)=" + fmt(pf[i], "%.4f") +
                " P(I_s)/P(I_f)=" + fmt(ratio_s[i], "%.4f") + " P(I_fu)/P(I_f)=" + fmt(ratio_fu[i], "%.4f") + "]";
  }
  return {mf >= kMinPrecisionF && ms <= kMaxRatioS && mfu >= kMinRatioFu && suite.seconds <= kBudgetToy,
          "medians over 3 seeds: P(I_f)=" + fmt(mf, "%.4f") + " (>= " + fmt(kMinPrecisionF) +
              "), P(I_s)/P(I_f)=" + fmt(ms, "%.4f") + " (<= " + fmt(kMaxRatioS) +
              "), P(I_fu)/P(I_f)=" + fmt(mfu, "%.4f") + " (>= " + fmt(kMinRatioFu) + "), " +
              fmt(suite.seconds, "%.0f") + " s for 3 runs (limit " + fmt(kBudgetToy) + " s);" + per_seed};
}

Outcome toy_quality(const fs::path& work) {
  const auto& suite = toy_suite(work);
  std::vector<double> psnr_rs, psnr_s, ssim_rs, ssim_s;
  for (const auto& run : suite.runs) {
    if (!run.ok) return {false, "toy-e2e failed, see " + (run.dir / "cli.log").string()};
    const auto* rs = run.report.quality_of("I_rs", "I_fu");
    const auto* s = run.report.quality_of("I_s", "I_fu");
    if (!rs || !s || !rs->psnr.median || !s->psnr.median || !rs->ssim.median || !s->ssim.median) {
      return {false, "missing quality entries in " + run.dir.string()};
    }
    psnr_rs.push_back(*rs->psnr.median);
    psnr_s.push_back(*s->psnr.median);
    ssim_rs.push_back(*rs->ssim.median);
    ssim_s.push_back(*s->ssim.median);
  }
  const double prs = median(psnr_rs), ps = median(psnr_s), srs = median(ssim_rs), ss = median(ssim_s);
  return {prs > ps && srs > ss && suite.seconds <= kBudgetToy,
          "vs I_fu, medians over 3 seeds: PSNR I_rs=" + fmt(prs, "%.3f") + " dB vs I_s=" + fmt(ps, "%.3f") +
              " dB, SSIM I_rs=" + fmt(srs, "%.4f") + " vs I_s=" + fmt(ss, "%.4f") +
              ", shared budget " + fmt(suite.seconds, "%.0f") + " s"};
}

std::vector<fs::path> reproducible_files(const fs::path& run) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(run / "data")) {
    if (e.path().extension() == ".jsonl" || e.path().filename() == "manifests.json") {
      files.push_back(fs::relative(e.path(), run));
    }
  }
  for (const auto& e : fs::directory_iterator(run / "logs")) {
    if (e.path().extension() == ".jsonl") files.push_back(fs::relative(e.path(), run));
  }
  for (const char* r : {"report.md", "report.csv", "report.json"}) files.emplace_back(r);
  std::sort(files.begin(), files.end());
  return files;
}

Outcome reproducibility(const fs::path& work) {
  const auto& first = toy_suite(work).runs.front();
  if (!first.ok) return {false, "toy-e2e failed, see " + (first.dir / "cli.log").string()};
  const auto again = work / "toy_seed0_rerun";
  fs::remove_all(again);
  fs::create_directories(again);
  // Same resolved config: replay the first run's resolved document as --config.
  const int status = run_cli("toy-e2e --out \"" + again.string() + "\" --config \"" +
                                 (first.dir / "resolved_config.json").string() + "\"",
                             again / "cli.log");
  if (status != 0) return {false, "rerun failed, see " + (again / "cli.log").string()};
  const auto files = reproducible_files(first.dir);
  std::vector<std::string> differing;
  for (const auto& f : files) {
    if (!fs::exists(again / f) || slurp(first.dir / f) != slurp(again / f)) differing.push_back(f.string());
  }
  std::string list;
  for (const auto& d : differing) list += " " + d;
  return {differing.empty() && files.size() >= 8,
          std::to_string(files.size()) + " files compared (manifests, loss histories, reports), " +
              (differing.empty() ? "all byte-identical" : "differing:" + list)};
}

// Include graph of a source file, restricted to project headers.
void collect_includes(const fs::path& file, const fs::path& include_root, std::set<fs::path>& seen) {
  static const std::regex inc(R"re(#include\s+"(sharpmask/[^"]+)")re");
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_search(line, m, inc)) continue;
    const auto header = include_root / m[1].str();
    if (seen.insert(header).second) collect_includes(header, include_root, seen);
  }
}

Outcome black_box(const fs::path& work) {
  const fs::path src = SHARPMASK_SOURCE_DIR;
  // Link graph from src/CMakeLists.txt.
  const auto cmake = slurp(src / "src/CMakeLists.txt");
  std::map<std::string, std::vector<std::string>> sources, deps;
  {
    static const std::regex lib(R"re(add_library\((\w+)\s+STATIC([^)]*)\))re");
    static const std::regex link(R"re(target_link_libraries\((\w+)([^)]*)\))re");
    static const std::regex word(R"re([\w./]+)re");
    for (std::sregex_iterator it(cmake.begin(), cmake.end(), lib), end; it != end; ++it) {
      const std::string body = (*it)[2];
      for (std::sregex_iterator w(body.begin(), body.end(), word); w != end; ++w) {
        sources[(*it)[1]].push_back(w->str());
      }
    }
    for (std::sregex_iterator it(cmake.begin(), cmake.end(), link), end; it != end; ++it) {
      const std::string body = (*it)[2];
      for (std::sregex_iterator w(body.begin(), body.end(), word); w != end; ++w) {
        if (w->str().rfind("sharpmask_", 0) == 0) deps[(*it)[1]].push_back(w->str());
      }
    }
  }
  std::set<std::string> closure;
  std::vector<std::string> stack = {"sharpmask_training", "sharpmask_attack"};
  while (!stack.empty()) {
    const auto t = stack.back();
    stack.pop_back();
    if (!closure.insert(t).second) continue;
    for (const auto& d : deps[t]) stack.push_back(d);
  }
  const std::set<std::string> forbidden_libs = {"sharpmask_detectors", "sharpmask_evaluation", "sharpmask_cli"};
  const std::set<std::string> forbidden_headers = {"detectors.hpp", "metrics.hpp", "report.hpp", "commands.hpp"};
  std::vector<std::string> violations;
  size_t scanned = 0;
  for (const auto& lib : closure) {
    if (forbidden_libs.count(lib)) violations.push_back("links " + lib);
    for (const auto& file : sources[lib]) {
      std::set<fs::path> seen;
      collect_includes(src / "src" / file, src / "include", seen);
      ++scanned;
      for (const auto& h : seen) {
        if (forbidden_headers.count(h.filename().string())) {
          violations.push_back(file + " includes " + h.filename().string());
        }
      }
    }
  }
  if (closure.size() < 5 || scanned == 0) violations.push_back("link graph not parsed");

  // Dynamic half: rerun the attack on the seed-0 run with detector checkpoints deleted.
  const auto& first = toy_suite(work).runs.front();
  if (!first.ok) return {false, "toy-e2e failed, see " + (first.dir / "cli.log").string()};
  size_t removed = 0;
  for (const auto& e : fs::directory_iterator(first.dir / "checkpoints")) {
    if (e.path().filename().string().rfind("detector_", 0) == 0) {
      fs::remove(e.path());
      ++removed;
    }
  }
  const auto again = work / "toy_seed0_no_detectors";
  fs::remove_all(again);
  fs::create_directories(again);
  const auto ck = first.dir / "checkpoints";
  const int status = run_cli("attack --out \"" + again.string() + "\" --config \"" +
                                 (first.dir / "resolved_config.json").string() + "\" --set dataset.root=\"" +
                                 (first.dir / "data").string() + "\" --set attack.g1_checkpoint=\"" +
                                 (ck / "fdn_g1.ckpt").string() + "\" --set attack.g2_checkpoint=\"" +
                                 (ck / "ven_g2.ckpt").string() + "\"",
                             again / "cli.log");
  size_t compared = 0;
  if (status != 0) {
    violations.push_back("attack without detector checkpoints failed, see " + (again / "cli.log").string());
  } else {
    for (const char* stage : {"fdn", "ven"}) {
      for (const char* sub : {"images", "masks"}) {
        for (const auto& e : fs::directory_iterator(first.dir / stage / sub)) {
          const auto rel = fs::path(stage) / sub / e.path().filename();
          ++compared;
          if (!fs::exists(again / rel) || slurp(e.path()) != slurp(again / rel)) {
            violations.push_back("attack output differs: " + rel.string());
            break;
          }
        }
      }
    }
  }
  std::string list;
  for (const auto& v : violations) list += " " + v;
  return {violations.empty() && removed > 0 && compared > 0,
          "link closure {" + [&] {
            std::string s;
            for (const auto& l : closure) s += (s.empty() ? "" : ",") + l;
            return s;
          }() + "}, " + std::to_string(scanned) + " sources scanned; " + std::to_string(removed) +
              " detector checkpoint(s) deleted, " + std::to_string(compared) + " attack files compared" +
              (violations.empty() ? ", identical" : "; violations:" + list)};
}

}  // namespace

int main(int argc, char** argv) {
  configure_runtime();
  const fs::path work = SHARPMASK_ACCEPTANCE_DIR;
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"usm-oracle-equivalence", usm_oracle},
      {"metric-correctness", metric_oracles},
      {"loss-gradients", gradient_checks},
      {"freeze-and-warm-start", [&] { return freeze_contracts(work); }},
      {"toy-undetectability", [&] { return toy_undetectability(work); }},
      {"toy-quality", [&] { return toy_quality(work); }},
      {"reproducibility", [&] { return reproducibility(work); }},
      {"black-box", [&] { return black_box(work); }},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
