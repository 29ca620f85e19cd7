#include <cmath>
#include <sstream>

#include "sharpmask/error.hpp"
#include "sharpmask/training.hpp"

namespace sharpmask {

std::string_view to_string(Profile p) { return p == Profile::Toy ? "toy" : "full"; }
std::string_view to_string(VenOrder o) { return o == VenOrder::G2ThenG1 ? "g2_g1" : "g1_g2"; }
std::string_view to_string(FdnMode m) { return m == FdnMode::TwoStage ? "two_stage" : "single_gan"; }

void TrainConfig::validate() const {
  std::ostringstream bad;
  if (!(alpha > 0.0)) bad << " alpha";
  if (!(beta > 0.0)) bad << " beta";
  if (!(learning_rate > 0.0)) bad << " learning_rate";
  if (batch_size < 1) bad << " batch_size";
  if (steps_fdn < 1) bad << " steps_fdn";
  if (steps_ven < 1) bad << " steps_ven";
  if (d_steps_per_g < 1) bad << " d_steps_per_g";
  if (freeze_check_every < 1) bad << " freeze_check_every";
  if (!bad.str().empty()) throw Error(ErrorKind::Validation, "train config invalid:" + bad.str());
}

void to_json(nlohmann::json& j, const StepRecord& r) {
  j = nlohmann::ordered_json{{"step", r.step}, {"stage", r.stage}, {"gan_term", r.gan_term},
                             {"recon_term", r.recon_term}, {"total", r.total}, {"d_loss", r.d_loss}};
}

double gradient_norm(const std::vector<torch::Tensor>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.grad().defined()) sq += p.grad().to(torch::kDouble).square().sum().item<double>();
  }
  return std::sqrt(sq);
}

namespace {

std::unique_ptr<torch::optim::Adam> make_adam(const std::vector<torch::Tensor>& params,
                                              const TrainConfig& c) {
  return std::make_unique<torch::optim::Adam>(
      params, torch::optim::AdamOptions(c.learning_rate).betas({c.adam_beta1, c.adam_beta2}));
}

// Backward + finiteness check; aborts before the optimizer touches weights.
void backward_checked(const torch::Tensor& loss, const std::vector<torch::Tensor>& params,
                      int64_t step, const char* term) {
  loss.backward();
  const double value = loss.item<double>();
  const double norm = gradient_norm(params);
  if (!std::isfinite(value) || !std::isfinite(norm)) {
    std::ostringstream os;
    os << "non-finite training signal at step " << step << ": term=" << term
       << " value=" << value << " grad_norm=" << norm;
    throw Error(ErrorKind::Diverged, os.str());
  }
}

nlohmann::json stage_metadata(const TrainConfig& c, int64_t steps) {
  return {{"steps", steps}, {"seed", c.seed}, {"profile", std::string(to_string(c.profile))}};
}

}  // namespace

FdnTrainer::FdnTrainer(const TrainConfig& config, const GanModelConfig& models,
                       SharpenParams sharpen)
    : config_(config), models_(models), sharpen_(sharpen) {
  config_.validate();
  sharpen_.validate();
  torch::manual_seed(config_.seed);
  g1_ = GeneratorG1(models_.g1);
  d1_ = make_d1(models_.d1);
  opt_g_ = make_adam(g1_->parameters(), config_);
  opt_d_ = make_adam(d1_->parameters(), config_);
  if (config_.fdn_mode == FdnMode::SingleGan) {
    d2_ = make_d2(models_.d2);
    opt_d2_ = make_adam(d2_->parameters(), config_);
  }
}

StepRecord FdnTrainer::step(const ImageBatch& real, const ImageBatch& fake) {
  if (!real.same_shape(fake)) {
    throw Error(ErrorKind::Shape, "FDN step: real and fake batches differ in shape");
  }
  const int64_t step_index = steps_;
  g1_->train();
  d1_->train();
  const auto i_ru = unsharp_mask(real, sharpen_).tensor();
  const auto i_f = fake.tensor();
  const auto i_s = g1_->forward(i_f);

  torch::Tensor d_loss;
  for (int64_t k = 0; k < config_.d_steps_per_g; ++k) {
    opt_d_->zero_grad();
    d_loss = loss_d1(d1_forward(d1_, i_f, i_s.detach()), d1_forward(d1_, i_f, i_ru));
    backward_checked(d_loss, d1_->parameters(), step_index, "d1");
    opt_d_->step();
  }

  torch::Tensor i_fu;
  if (d2_) {
    i_fu = unsharp_mask(fake, sharpen_).tensor();
    opt_d2_->zero_grad();
    auto d2_loss = loss_d2(d2_->forward(i_s.detach()), d2_->forward(i_fu));
    backward_checked(d2_loss, d2_->parameters(), step_index, "d2");
    opt_d2_->step();
    d_loss = d_loss + d2_loss.detach();
  }

  opt_g_->zero_grad();
  auto loss = loss_g1(d1_forward(d1_, i_f, i_s), i_s, i_ru, config_.alpha);
  if (d2_) {
    auto visual = loss_g2(d2_->forward(i_s), i_s, i_fu, config_.beta);
    loss.gan = loss.gan + visual.gan;
    loss.recon = loss.recon + visual.recon;
    loss.total = loss.total + visual.total;
  }
  backward_checked(loss.total, g1_->parameters(), step_index, "g1");
  opt_g_->step();
  ++steps_;

  const auto b = loss.breakdown(step_index);
  return {step_index, "fdn", b.gan_term, b.recon_term, b.total, d_loss.item<double>()};
}

StageCheckpoint FdnTrainer::g1_checkpoint() const {
  return capture_checkpoint(*g1_, StageTag::FdnG1, models_.g1, stage_metadata(config_, steps_));
}

StageCheckpoint FdnTrainer::d1_checkpoint() const {
  auto meta = stage_metadata(config_, steps_);
  meta["in_channels"] = d1_->in_channels();
  return capture_checkpoint(*d1_, StageTag::FdnD1, models_.d1, meta);
}

VenTrainer::VenTrainer(const TrainConfig& config, const GanModelConfig& models,
                       SharpenParams sharpen, const StageCheckpoint& fdn_g1)
    : config_(config), models_(models), sharpen_(sharpen) {
  config_.validate();
  sharpen_.validate();
  g1_ = restore_g1(fdn_g1);
  frozen_digest_ = parameter_digest(*g1_);
  if (frozen_digest_ != fdn_g1.digest) {
    throw Error(ErrorKind::Contract, "VEN: restored G1 digest differs from its checkpoint");
  }
  for (auto& p : g1_->parameters()) p.requires_grad_(false);
  models_.g1 = g1_->config();

  torch::manual_seed(config_.seed + 1);
  g2_ = GeneratorG2(models_.g2);
  d2_ = make_d2(models_.d2);
  opt_g_ = make_adam(g2_->parameters(), config_);
  opt_d_ = make_adam(d2_->parameters(), config_);
}

torch::Tensor VenTrainer::compose(const torch::Tensor& fake) {
  g1_->eval();
  if (config_.ven_order == VenOrder::G2ThenG1) return g1_->forward(g2_->forward(fake));
  return g2_->forward(g1_->forward(fake));
}

void VenTrainer::verify_freeze() const {
  const auto now = parameter_digest(*g1_);
  if (now != frozen_digest_) {
    throw Error(ErrorKind::Contract, "VEN: frozen G1 parameters changed (digest " +
                                         frozen_digest_.substr(0, 12) + " -> " +
                                         now.substr(0, 12) + ")");
  }
}

StepRecord VenTrainer::step(const ImageBatch& fake) {
  const int64_t step_index = steps_;
  g2_->train();
  d2_->train();
  const auto i_f = fake.tensor();
  const auto i_fu = unsharp_mask(fake, sharpen_).tensor();
  const auto i_rs = compose(i_f);

  torch::Tensor d_loss;
  for (int64_t k = 0; k < config_.d_steps_per_g; ++k) {
    opt_d_->zero_grad();
    d_loss = loss_d2(d2_->forward(i_rs.detach()), d2_->forward(i_fu));
    backward_checked(d_loss, d2_->parameters(), step_index, "d2");
    opt_d_->step();
  }

  opt_g_->zero_grad();
  auto loss = loss_g2(d2_->forward(i_rs), i_rs, i_fu, config_.beta);
  backward_checked(loss.total, g2_->parameters(), step_index, "g2");
  last_g2_grad_norm_ = gradient_norm(g2_->parameters());
  opt_g_->step();
  ++steps_;

  if (steps_ % config_.freeze_check_every == 0) verify_freeze();

  const auto b = loss.breakdown(step_index);
  return {step_index, "ven", b.gan_term, b.recon_term, b.total, d_loss.item<double>()};
}

StageCheckpoint VenTrainer::g2_checkpoint() const {
  auto meta = stage_metadata(config_, steps_);
  meta["fdn_g1_digest"] = frozen_digest_;
  meta["ven_order"] = std::string(to_string(config_.ven_order));
  return capture_checkpoint(*g2_, StageTag::VenG2, models_.g2, meta);
}

StageCheckpoint VenTrainer::d2_checkpoint() const {
  auto meta = stage_metadata(config_, steps_);
  meta["in_channels"] = d2_->in_channels();
  return capture_checkpoint(*d2_, StageTag::VenD2, models_.d2, meta);
}

}  // namespace sharpmask
