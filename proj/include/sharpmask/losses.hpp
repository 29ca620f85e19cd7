#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace sharpmask {

/// Scalar record of one generator objective evaluation.
struct LossBreakdown {
  double gan_term = 0.0;
  double recon_term = 0.0;
  double total = 0.0;
  int64_t step = 0;
};

/// Differentiable generator objective: total = gan + weight * recon.
struct GeneratorLoss {
  torch::Tensor gan;
  torch::Tensor recon;
  torch::Tensor total;

  LossBreakdown breakdown(int64_t step) const;
};

/// Scores are clamped to [kLogClamp, 1 - kLogClamp] before any logarithm.
inline constexpr double kLogClamp = 1e-7;

/// Non-saturating generator loss mean(-log scores) plus weighted per-element
/// mean L1 between output and target.
GeneratorLoss generator_loss(const torch::Tensor& scores, const torch::Tensor& output,
                             const torch::Tensor& target, double weight);

/// FDN generator: scores = D1(I_f (+) I_s), recon against the sharpened real.
GeneratorLoss loss_g1(const torch::Tensor& d1_scores_fake_pair, const torch::Tensor& i_s,
                      const torch::Tensor& i_ru, double alpha);

/// VEN generator: scores = D2(I_rs), recon against the sharpened fake.
GeneratorLoss loss_g2(const torch::Tensor& d2_scores, const torch::Tensor& i_rs,
                      const torch::Tensor& i_fu, double beta);

/// Binary cross-entropy discriminator objective:
/// mean(-log real) + mean(-log(1 - fake)).
torch::Tensor discriminator_loss(const torch::Tensor& scores_fake,
                                 const torch::Tensor& scores_real);

/// D1: real class is I_f (+) I_ru, fake class is I_f (+) I_s.
torch::Tensor loss_d1(const torch::Tensor& scores_fake_pair, const torch::Tensor& scores_real_pair);

/// D2: real class is the sharpened fake I_fu, fake class is I_rs.
torch::Tensor loss_d2(const torch::Tensor& scores_fake, const torch::Tensor& scores_sharp_real_target);

/// Throws ErrorKind::Contract unless every score lies strictly inside (0, 1).
void check_scores(const torch::Tensor& scores, const char* who);

}  // namespace sharpmask
