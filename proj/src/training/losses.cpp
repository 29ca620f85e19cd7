#include "sharpmask/losses.hpp"

#include "sharpmask/error.hpp"

namespace sharpmask {

LossBreakdown GeneratorLoss::breakdown(int64_t step) const {
  return {gan.item<double>(), recon.item<double>(), total.item<double>(), step};
}

void check_scores(const torch::Tensor& scores, const char* who) {
  if (!scores.defined() || scores.numel() == 0) {
    throw Error(ErrorKind::Contract, std::string(who) + ": empty score map");
  }
  const auto lo = scores.min().item<double>();
  const auto hi = scores.max().item<double>();
  if (!(lo > 0.0 && hi < 1.0)) {
    throw Error(ErrorKind::Contract,
                std::string(who) + ": discriminator scores must lie strictly inside (0, 1)");
  }
}

namespace {

torch::Tensor neg_log(const torch::Tensor& p) {
  return -torch::log(p.clamp(kLogClamp, 1.0 - kLogClamp));
}

}  // namespace

GeneratorLoss generator_loss(const torch::Tensor& scores, const torch::Tensor& output,
                             const torch::Tensor& target, double weight) {
  check_scores(scores, "generator loss");
  if (output.sizes() != target.sizes()) {
    throw Error(ErrorKind::Shape, "generator loss: output and target differ in shape");
  }
  GeneratorLoss loss;
  loss.gan = neg_log(scores).mean();
  loss.recon = (output - target).abs().mean();
  loss.total = loss.gan + loss.recon * weight;
  return loss;
}

GeneratorLoss loss_g1(const torch::Tensor& d1_scores_fake_pair, const torch::Tensor& i_s,
                      const torch::Tensor& i_ru, double alpha) {
  return generator_loss(d1_scores_fake_pair, i_s, i_ru, alpha);
}

GeneratorLoss loss_g2(const torch::Tensor& d2_scores, const torch::Tensor& i_rs,
                      const torch::Tensor& i_fu, double beta) {
  return generator_loss(d2_scores, i_rs, i_fu, beta);
}

torch::Tensor discriminator_loss(const torch::Tensor& scores_fake,
                                 const torch::Tensor& scores_real) {
  check_scores(scores_fake, "discriminator loss");
  check_scores(scores_real, "discriminator loss");
  return neg_log(scores_real).mean() + neg_log(1.0 - scores_fake).mean();
}

torch::Tensor loss_d1(const torch::Tensor& scores_fake_pair, const torch::Tensor& scores_real_pair) {
  return discriminator_loss(scores_fake_pair, scores_real_pair);
}

torch::Tensor loss_d2(const torch::Tensor& scores_fake, const torch::Tensor& scores_sharp_real_target) {
  return discriminator_loss(scores_fake, scores_sharp_real_target);
}

}  // namespace sharpmask
