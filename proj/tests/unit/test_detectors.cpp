#include <doctest.h>

#include <torch/script.h>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/detectors.hpp"
#include "sharpmask/error.hpp"
#include "test_support.hpp"

using namespace sharpmask;
using sharpmask::test::random_batch;
using sharpmask::test::TempDir;

TEST_SUITE("detectors") {

TEST_CASE("registry lists the built-in and external architectures") {
  const auto& reg = DetectorRegistry::instance();
  CHECK(reg.find("toy_cnn") == DetectorKind::BuiltinToyCnn);
  for (const char* name : {"resnet50", "densenet121", "efficientnet", "mobilenet", "shufflenet",
                           "convnext", "efficientnet_sbis"}) {
    CHECK(reg.find(name) == DetectorKind::TorchScript);
  }
  CHECK_FALSE(reg.find("nope").has_value());
  CHECK_THROWS_AS(reg.load("nope", "x"), Error);
}

TEST_CASE("thresholding labels FAKE at p >= threshold") {
  torch::manual_seed(1);
  ToyCnnDetector det("toy_cnn", ToyCnn(ToyCnnConfig{}));
  const auto imgs = random_batch(4, 32, 2);
  const auto p = det.probability_fake(imgs);
  const auto all_fake = detector_predict(det, imgs, 0.0);
  const auto all_real = detector_predict(det, imgs, 1.0 + 1e-9);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(all_fake[i].label == Label::Fake);
    CHECK(all_real[i].label == Label::Real);
    CHECK(all_fake[i].probability_fake == doctest::Approx(p[i]));
  }
  CHECK(to_string(Label::Fake) == "FAKE");
}

TEST_CASE("training is deterministic and the checkpoint reloads") {
  TempDir dir("detector");
  ToyDatasetOptions opt;
  opt.n_pairs = 8;
  const auto m = synthesize_toy_dataset(opt, dir / "data");
  DetectorTrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 4;
  const auto a = train_detector("toy_cnn", cfg, m, m);
  const auto b = train_detector("toy_cnn", cfg, m, m);
  CHECK(a.checkpoint.digest == b.checkpoint.digest);
  CHECK(a.loss_history == b.loss_history);
  CHECK(a.loss_history.size() == 5);
  CHECK(a.checkpoint.stage == StageTag::Detector);

  save_checkpoint(dir / "d.ckpt", a.checkpoint);
  const auto det = DetectorRegistry::instance().load("toy_cnn", dir / "d.ckpt");
  const auto again = evaluate_detector(*det, m);
  CHECK(again.accuracy == doctest::Approx(a.test_metrics.accuracy));

  const auto real_only = evaluate_detector(*det, m, true, false);
  CHECK_FALSE(real_only.precision.has_value());
  CHECK(nlohmann::json(real_only).at("precision") == "N/A");
}

TEST_CASE("TorchScript detectors accept N x 2 logits") {
  TempDir dir("script");
  torch::jit::Module mod("Scorer");
  mod.define(R"(
    def forward(self, x):
        s = x.mean(dim=[1, 2, 3])
        return torch.stack([1.0 - s, s], dim=1)
  )");
  mod.save((dir / "scorer.pt").string());
  const auto det = DetectorRegistry::instance().load("resnet50", dir / "scorer.pt");
  const auto dark = ImageBatch::from_tensor(torch::zeros({2, 3, 8, 8}));
  const auto p = det->probability_fake(dark);
  CHECK(p[0] == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
  CHECK(det->name() == "resnet50");
  CHECK_THROWS_AS(DetectorRegistry::instance().load("resnet50", dir / "missing.pt"), Error);
}

}  // TEST_SUITE
