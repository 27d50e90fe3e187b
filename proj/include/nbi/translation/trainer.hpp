#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>

#include <json.hpp>
#include <torch/torch.h>

#include "nbi/common/rng.hpp"
#include "nbi/data/augment.hpp"
#include "nbi/data/dataset.hpp"
#include "nbi/translation/bundle.hpp"
#include "nbi/translation/losses.hpp"

namespace nbi::translation {

struct GanTrainConfig {
  int epochs = 1000;
  double initial_lr = 1e-5;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch_size = 1;
  /// Random flips and quarter turns on both pools.
  bool augment = true;
  /// Patches are padded to canvas x canvas before anything else.
  int canvas = 768;
  /// 0 trains on full canvases; otherwise on random crop x crop windows.
  int crop = 0;
  data::PadOptions pad;
  AdversarialForm form = AdversarialForm::log;
  bool replay_buffer = false;
  int replay_capacity = 50;
  LossWeights weights;
  GeneratorSpec generator;
  DiscriminatorSpec discriminator;
  std::uint64_t seed = 0;
  /// Write the bundle every N epochs (0 = never) to checkpoint_path.
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_path;
  /// Append-only `epoch,L_c,L_d_gen,L_d_disc` log; empty disables it.
  std::filesystem::path loss_log;

  /// Throws ValidationError on an unusable configuration.
  void validate() const;
};

nlohmann::json to_json(const GanTrainConfig& config);
/// Rejects unknown keys; absent keys keep their defaults.
GanTrainConfig gan_config_from_json(const nlohmann::json& j);

/// Learning-rate multiplier: 1 for the first ceil(epochs / 2) epochs, then
/// a linear ramp towards 0.
double lr_factor(int epoch, int epochs);

struct GeneratorStepLoss {
  double cycle = 0;
  double adversarial = 0;  ///< generator view of the adversarial loss
};

struct EpochLoss {
  std::int64_t epoch = 0;
  double cycle = 0;
  double adversarial_generator = 0;
  double adversarial_discriminator = 0;
};

/// Bounded pool of earlier fakes. Once full, each query returns either the
/// incoming image or (with probability 1/2) a stored one it swaps out.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}
  torch::Tensor query(const torch::Tensor& images, Rng& rng);
  std::size_t size() const { return stored_.size(); }

 private:
  int capacity_;
  std::deque<torch::Tensor> stored_;
};

/// Alternating optimization of a bundle. Owns the optimizers; the bundle must
/// outlive the trainer and must not be trained by anyone else meanwhile.
class TranslationTrainer {
 public:
  TranslationTrainer(TranslationBundle& bundle, const GanTrainConfig& config);

  /// One descent step on w_cyc * L_c + w_gan * (generator objective).
  /// Only generator parameters change.
  GeneratorStepLoss generator_step(const torch::Tensor& wli, const torch::Tensor& nbi);

  /// One descent step on the discriminator objective with frozen
  /// generators; returns the adversarial loss value seen by the critics.
  /// Only discriminator parameters change.
  double discriminator_step(const torch::Tensor& wli, const torch::Tensor& nbi);

  void set_learning_rate(double lr);

 private:
  TranslationBundle& bundle_;
  GanTrainConfig config_;
  torch::optim::Adam generator_opt_;
  torch::optim::Adam discriminator_opt_;
  ReplayBuffer wli_fakes_;
  ReplayBuffer nbi_fakes_;
  Rng rng_;
};

using EpochObserver = std::function<void(const EpochLoss&)>;

/// Full unpaired training run. Throws ValidationError for empty pools and
/// NumericalError (with the loss components) when a loss turns non-finite.
TranslationBundle train_translation(const GanTrainConfig& config, const data::DomainDataset& wli,
                                    const data::DomainDataset& nbi, const EpochObserver& observer = {});

/// Builds one training batch: pad, optional crop, optional dihedral transform.
torch::Tensor make_gan_batch(const data::DomainDataset& pool, const std::vector<std::size_t>& indices,
                             const GanTrainConfig& config, Rng& rng);

}  // namespace nbi::translation
