#pragma once

#include <functional>

#include <torch/torch.h>

namespace nbi::translation {

/// Image-to-image map, e.g. a generator or a test stub. (N,3,H,W) -> (N,3,H,W).
using ImageMap = std::function<torch::Tensor(const torch::Tensor&)>;
/// Critic returning per-image probabilities as a (N, 1, h, w) grid or (N) vector.
using Critic = std::function<torch::Tensor(const torch::Tensor&)>;

inline constexpr double kProbabilityClamp = 1e-7;

enum class AdversarialForm {
  /// log D(real) + log(1 - D(fake)), as the objective is usually written.
  log,
  /// Squared-error variant of the same game on the critic's probabilities.
  least_squares,
};

struct CycleLoss {
  torch::Tensor x_cycle;  ///< mean |G(F(x)) - x|
  torch::Tensor y_cycle;  ///< mean |F(G(y)) - y|
  torch::Tensor total() const { return x_cycle + y_cycle; }
};

/// Cycle-consistency loss with expectations taken as batch means of the
/// per-image mean absolute error. `to_y` is F: X -> Y, `to_x` is G: Y -> X.
/// Throws ValidationError if a reconstruction's shape differs from its input.
CycleLoss cycle_loss(const ImageMap& to_y, const ImageMap& to_x, const torch::Tensor& x, const torch::Tensor& y);

/// Same loss when the reconstructions are already available.
CycleLoss cycle_loss_from(const torch::Tensor& x, const torch::Tensor& x_reconstructed, const torch::Tensor& y,
                          const torch::Tensor& y_reconstructed);

/// Per-image critic probability: grid mean, clamped to [1e-7, 1 - 1e-7].
/// Throws InternalError if the result is not a probability (NaN included).
torch::Tensor image_probability(const torch::Tensor& critic_output);

/// The four batch-mean terms of the adversarial game.
struct AdversarialTerms {
  torch::Tensor real_x;  ///< E_x log D_X(x)
  torch::Tensor fake_y;  ///< E_x log(1 - D_Y(F(x)))
  torch::Tensor fake_x;  ///< E_y log(1 - D_X(G(y)))
  torch::Tensor real_y;  ///< E_y log D_Y(y)

  /// Sum of the four terms (the adversarial loss value).
  torch::Tensor value() const { return real_x + fake_y + fake_x + real_y; }
};

/// Terms from critic outputs on real X, F(x), G(y) and real Y.
AdversarialTerms adversarial_terms(const torch::Tensor& dx_real, const torch::Tensor& dy_fake,
                                   const torch::Tensor& dx_fake, const torch::Tensor& dy_real);

/// Adversarial loss of the full model on unpaired batches.
torch::Tensor adversarial_loss(const ImageMap& to_y, const ImageMap& to_x, const Critic& critic_x,
                               const Critic& critic_y, const torch::Tensor& x, const torch::Tensor& y);

/// Generator objective to minimize. For the log form this is the adversarial
/// loss itself (the real-image terms carry no generator gradient); for least
/// squares it is E (D(fake) - 1)^2 summed over both directions.
torch::Tensor generator_objective(AdversarialForm form, const torch::Tensor& dx_real, const torch::Tensor& dy_fake,
                                  const torch::Tensor& dx_fake, const torch::Tensor& dy_real);

/// Discriminator objective to minimize: the negated adversarial loss for the
/// log form, E (D(real) - 1)^2 + E D(fake)^2 for least squares.
torch::Tensor discriminator_objective(AdversarialForm form, const torch::Tensor& dx_real,
                                      const torch::Tensor& dy_fake, const torch::Tensor& dx_fake,
                                      const torch::Tensor& dy_real);

}  // namespace nbi::translation
