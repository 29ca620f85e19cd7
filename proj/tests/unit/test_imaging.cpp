#include <doctest.h>

#include <cmath>
#include <fstream>

#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/imaging.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace sharpmask;
using sharpmask::test::dense_usm_oracle;
using sharpmask::test::random_batch;
using sharpmask::test::TempDir;

namespace {

double max_abs(const torch::Tensor& a, const torch::Tensor& b) {
  return (a.to(torch::kDouble) - b.to(torch::kDouble)).abs().max().item<double>();
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("gaussian kernel is normalized with radius ceil(3 sigma)") {
  const auto k = gaussian_kernel(1.0);
  CHECK(k.size() == 7);
  double sum = 0.0;
  for (double v : k) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(k[0] == doctest::Approx(k[6]));
  CHECK(gaussian_kernel(0.4).size() == 5);
}

TEST_CASE("reflect index mirrors without repeating the edge") {
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(-2, 5) == 2);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(6, 5) == 2);
  CHECK(reflect_index(2, 5) == 2);
  CHECK(reflect_index(-3, 1) == 0);
}

TEST_CASE("unsharp mask matches the dense 2-D oracle") {
  const SharpenParams p;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const auto img = random_batch(1, 16, 100 + seed, torch::kDouble);
    CHECK(max_abs(unsharp_mask(img, p).tensor(), dense_usm_oracle(img.tensor(), p.sigma, p.amount)) <=
          1e-6);
  }
  SharpenParams wide{2.0, 1.5, 0.0};
  const auto img = random_batch(2, 16, 7, torch::kDouble);
  CHECK(max_abs(unsharp_mask(img, wide).tensor(), dense_usm_oracle(img.tensor(), 2.0, 1.5)) <= 1e-6);
}

TEST_CASE("unsharp mask with zero amount is the identity") {
  const auto img = random_batch(2, 16, 3);
  const auto out = unsharp_mask(img, {1.0, 0.0, 0.0});
  CHECK(torch::equal(out.tensor(), img.tensor()));
  CHECK((out.tensor().scalar_type() == torch::kFloat));
}

TEST_CASE("unsharp mask leaves constant images unchanged") {
  const auto img = ImageBatch::from_tensor(torch::full({1, 3, 9, 9}, 0.5));
  for (const SharpenParams& p : {SharpenParams{1.0, 0.8, 0.0}, SharpenParams{3.0, 5.0, 0.1}}) {
    CHECK(torch::equal(unsharp_mask(img, p).tensor(), img.tensor()));
  }
}

TEST_CASE("unsharp mask saturates at 1") {
  // A bright pixel on a dark background gets a large positive boost.
  auto t = torch::full({1, 3, 8, 8}, 0.2, torch::kDouble);
  t.index_put_({0, torch::indexing::Slice(), 4, 4}, 0.99);
  const auto out = unsharp_mask(ImageBatch::from_tensor(t), {1.0, 0.8, 0.0}).tensor();
  CHECK(out[0][0][4][4].item<double>() == 1.0);
}

TEST_CASE("threshold zeroes small details") {
  const auto img = random_batch(1, 16, 11, torch::kDouble);
  const auto out = unsharp_mask(img, {1.0, 0.8, 1.0});
  CHECK(torch::equal(out.tensor(), img.tensor()));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(ImageBatch::from_tensor(torch::full({1, 3, 4, 4}, 1.5)), Error);
  CHECK_THROWS_AS(ImageBatch::from_tensor(torch::zeros({1, 1, 4, 4})), Error);
  CHECK_THROWS_AS(ImageBatch::from_tensor(torch::zeros({1, 3, 4, 5})), Error);
  CHECK_THROWS_AS(ImageBatch::from_tensor(torch::zeros({0, 3, 4, 4})), Error);
  auto nan = torch::zeros({1, 3, 4, 4});
  nan[0][0][0][0] = std::nan("");
  CHECK_THROWS_AS(ImageBatch::from_tensor(nan), Error);
  CHECK_THROWS_AS(ImageBatch::from_tensor_clamped(nan), Error);
  CHECK_THROWS_AS((SharpenParams{0.0, 1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((SharpenParams{1.0, -1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((SharpenParams{1.0, 1.0, 2.0}.validate()), Error);
}

TEST_CASE("mask algebra round-trips exactly") {
  const auto base = random_batch(2, 8, 1);
  const auto composed = random_batch(2, 8, 2);
  const auto mask = extract_mask(base, composed, MaskStage::Ven);
  CHECK(mask.stage == MaskStage::Ven);
  CHECK(torch::equal(apply_mask(base, mask).tensor(), composed.tensor()));
  CHECK(torch::equal((base.tensor().to(torch::kDouble) + mask.data).to(torch::kFloat),
                     composed.tensor()));
  const auto zero = extract_mask(base, base, MaskStage::Fdn);
  CHECK(zero.data.abs().max().item<double>() == 0.0);
  CHECK_THROWS_AS(extract_mask(base, random_batch(2, 4, 3), MaskStage::Fdn), Error);
}

TEST_CASE("mask visualization conventions") {
  AdversarialMask zero{torch::zeros({1, 3, 4, 4}, torch::kDouble), MaskStage::Fdn};
  const auto flat = visualize_mask(zero);
  CHECK(flat.image.tensor().sub(0.5).abs().max().item<double>() == 0.0);

  auto data = torch::zeros({1, 3, 4, 4}, torch::kDouble);
  data[0][0][0][0] = -0.1;
  data[0][0][0][1] = 0.1;
  const auto vis = visualize_mask({data, MaskStage::Fdn});
  CHECK(vis.min == doctest::Approx(-0.1));
  CHECK(vis.max == doctest::Approx(0.1));
  CHECK(vis.image.tensor()[0][0][1][1].item<double>() == doctest::Approx(0.5));
}

TEST_CASE("mask visualization export round-trips within 8-bit error") {
  TempDir dir("vis");
  const auto base = random_batch(1, 16, 5);
  const auto composed = unsharp_mask(base, {});
  const auto mask = extract_mask(base, composed, MaskStage::Ven);
  save_mask_visualization(dir / "m_vis.png", visualize_mask(mask));
  CHECK(std::filesystem::exists(dir / "m_vis.json"));
  const auto back = load_mask_visualization(dir / "m_vis.png");
  const double range = mask.data.max().item<double>() - mask.data.min().item<double>();
  CHECK(max_abs(back, mask.data) <= range / 255.0 + 1e-12);
}

TEST_CASE("mask statistics and histogram") {
  auto data = torch::zeros({1, 3, 2, 2}, torch::kDouble);
  data[0][0][0][0] = 0.3;
  data[0][1][0][0] = -0.05;
  const AdversarialMask m{data, MaskStage::Fdn};
  const auto s = mask_stats(m);
  CHECK(s.max_abs == doctest::Approx(0.3));
  CHECK(s.min == doctest::Approx(-0.05));
  CHECK(s.mean_abs == doctest::Approx(0.35 / 12.0));
  const auto h = mask_magnitude_histogram(m, 4, 0.2);
  CHECK(h.size() == 4);
  CHECK(h[0] == 10);
  CHECK(h[1] == 1);
  CHECK(h[3] == 1);  // out-of-range magnitudes land in the last bin
}

TEST_CASE("png codec round trip") {
  TempDir dir("png");
  const auto zeros = ImageBatch::from_tensor(torch::zeros({1, 3, 8, 8}));
  save_image(dir / "z.png", zeros);
  CHECK(torch::equal(load_image(dir / "z.png").tensor(), zeros.tensor()));

  const auto ones = ImageBatch::from_tensor(torch::ones({1, 3, 8, 8}));
  save_image(dir / "o.png", ones);
  CHECK(torch::equal(load_image(dir / "o.png").tensor(), ones.tensor()));

  // Every 8-bit level and the midpoints between them.
  auto levels = torch::arange(0, 511, torch::kDouble).div(510.0);
  auto t = levels.index({torch::indexing::Slice(0, 507)}).reshape({1, 3, 13, 13});
  const auto img = ImageBatch::from_tensor(t);
  save_image(dir / "l.png", img);
  const auto back = load_image(dir / "l.png", 13);
  CHECK(max_abs(back.tensor(), img.tensor()) <= 1.0 / 510.0 + 1e-7);
  CHECK(torch::equal(quantize_8bit(img).tensor(), back.tensor()));

  const auto rnd = random_batch(1, 16, 9);
  save_image(dir / "r.png", rnd);
  CHECK(max_abs(load_image(dir / "r.png").tensor(), rnd.tensor()) <= 1.0 / 510.0 + 1e-7);
}

TEST_CASE("png codec errors name the file") {
  TempDir dir("pngerr");
  { std::ofstream(dir / "bad.png") << "not a png"; }
  try {
    load_image(dir / "bad.png");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.png") != std::string::npos);
  }
  save_image(dir / "s.png", random_batch(1, 8, 1));
  CHECK_THROWS_AS(load_image(dir / "s.png", 16), Error);
  CHECK_THROWS_AS(save_image(dir / "two.png", random_batch(2, 8, 1)), Error);
}

TEST_CASE("npy round trip is lossless") {
  TempDir dir("npy");
  auto gen = at::make_generator<at::CPUGeneratorImpl>(3);
  const auto d = at::randn({1, 3, 5, 5}, gen, torch::TensorOptions().dtype(torch::kDouble));
  save_npy(dir / "d.npy", d);
  CHECK(torch::equal(load_npy(dir / "d.npy"), d));
  const auto f = d.to(torch::kFloat);
  save_npy(dir / "f.npy", f);
  CHECK(torch::equal(load_npy(dir / "f.npy"), f));
}

}  // TEST_SUITE
