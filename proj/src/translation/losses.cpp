#include "nbi/translation/losses.hpp"

#include "nbi/common/error.hpp"

namespace nbi::translation {
namespace {

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes())
    throw ValidationError(std::string(what) + ": reconstruction shape " + c10::str(a.sizes()) +
                          " does not match input " + c10::str(b.sizes()));
}

torch::Tensor mean_l1(const torch::Tensor& a, const torch::Tensor& b) { return (a - b).abs().mean(); }

}  // namespace

CycleLoss cycle_loss_from(const torch::Tensor& x, const torch::Tensor& x_reconstructed, const torch::Tensor& y,
                          const torch::Tensor& y_reconstructed) {
  check_same_shape(x_reconstructed, x, "x cycle");
  check_same_shape(y_reconstructed, y, "y cycle");
  if (x.numel() == 0 || y.numel() == 0) throw ValidationError("cycle loss needs nonempty batches");
  // Equal-size images: the mean over all elements equals the batch mean of
  // per-image mean absolute errors.
  return {mean_l1(x_reconstructed, x), mean_l1(y_reconstructed, y)};
}

CycleLoss cycle_loss(const ImageMap& to_y, const ImageMap& to_x, const torch::Tensor& x, const torch::Tensor& y) {
  return cycle_loss_from(x, to_x(to_y(x)), y, to_y(to_x(y)));
}

torch::Tensor image_probability(const torch::Tensor& critic_output) {
  if (critic_output.dim() < 1 || critic_output.size(0) == 0) throw ValidationError("empty critic output");
  const auto p = critic_output.reshape({critic_output.size(0), -1}).mean(1);
  // NaN fails both comparisons.
  const auto raw = p.detach();
  if (!(raw >= 0.0).logical_and(raw <= 1.0).all().item<bool>())
    throw InternalError("critic output is not a probability");
  return p.clamp(kProbabilityClamp, 1.0 - kProbabilityClamp);
}

AdversarialTerms adversarial_terms(const torch::Tensor& dx_real, const torch::Tensor& dy_fake,
                                   const torch::Tensor& dx_fake, const torch::Tensor& dy_real) {
  AdversarialTerms t;
  t.real_x = image_probability(dx_real).log().mean();
  t.fake_y = (1.0 - image_probability(dy_fake)).log().mean();
  t.fake_x = (1.0 - image_probability(dx_fake)).log().mean();
  t.real_y = image_probability(dy_real).log().mean();
  return t;
}

torch::Tensor adversarial_loss(const ImageMap& to_y, const ImageMap& to_x, const Critic& critic_x,
                               const Critic& critic_y, const torch::Tensor& x, const torch::Tensor& y) {
  return adversarial_terms(critic_x(x), critic_y(to_y(x)), critic_x(to_x(y)), critic_y(y)).value();
}

torch::Tensor generator_objective(AdversarialForm form, const torch::Tensor& dx_real, const torch::Tensor& dy_fake,
                                  const torch::Tensor& dx_fake, const torch::Tensor& dy_real) {
  if (form == AdversarialForm::log) return adversarial_terms(dx_real, dy_fake, dx_fake, dy_real).value();
  return (image_probability(dy_fake) - 1.0).square().mean() + (image_probability(dx_fake) - 1.0).square().mean();
}

torch::Tensor discriminator_objective(AdversarialForm form, const torch::Tensor& dx_real,
                                      const torch::Tensor& dy_fake, const torch::Tensor& dx_fake,
                                      const torch::Tensor& dy_real) {
  if (form == AdversarialForm::log) return -adversarial_terms(dx_real, dy_fake, dx_fake, dy_real).value();
  return (image_probability(dx_real) - 1.0).square().mean() + image_probability(dy_fake).square().mean() +
         image_probability(dx_fake).square().mean() + (image_probability(dy_real) - 1.0).square().mean();
}

}  // namespace nbi::translation
