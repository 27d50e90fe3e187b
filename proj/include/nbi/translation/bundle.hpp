#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "nbi/common/checkpoint.hpp"
#include "nbi/translation/networks.hpp"

namespace nbi::translation {

/// Loss weights. The identity-mapping term is not part of the objective.
struct LossWeights {
  double cycle = 1.0;
  double adversarial = 1.0;

  bool operator==(const LossWeights&) const = default;
};

/// The four networks of the cycle model plus the state needed to reproduce
/// and identify them. WLI is the X domain, NBI the Y domain.
struct TranslationBundle {
  GeneratorSpec generator_spec;
  DiscriminatorSpec discriminator_spec;
  LossWeights weights;
  UNetGenerator wli_to_nbi{nullptr};  ///< F: X -> Y
  UNetGenerator nbi_to_wli{nullptr};  ///< G: Y -> X
  PatchDiscriminator wli_critic{nullptr};  ///< D_X
  PatchDiscriminator nbi_critic{nullptr};  ///< D_Y
  std::int64_t epoch = 0;
  std::uint64_t seed = 0;
  /// Side of the square canvas images were padded to for training.
  int canvas = 768;
  std::string config_hash;

  /// Fresh networks, deterministically initialized from `seed`.
  static TranslationBundle create(const GeneratorSpec& generator, const DiscriminatorSpec& discriminator,
                                  const LossWeights& weights, std::uint64_t seed, int canvas);

  std::vector<torch::Tensor> generator_parameters() const;
  std::vector<torch::Tensor> discriminator_parameters() const;

  /// Converts all four networks, e.g. to kFloat64 for gradient checks.
  void to(torch::Dtype dtype);

  Checkpoint to_checkpoint() const;
  static TranslationBundle from_checkpoint(const Checkpoint& ckpt);
  void save(const std::filesystem::path& path) const;
  static TranslationBundle load(const std::filesystem::path& path);
};

}  // namespace nbi::translation
