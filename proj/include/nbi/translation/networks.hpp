#pragma once

#include <torch/torch.h>

#include <json.hpp>

namespace nbi::translation {

enum class NormKind { instance, none };

/// U-Net encoder/decoder with skip connections.
struct GeneratorSpec {
  /// Down/up levels; input sides must be divisible by 2^depth.
  int depth = 6;
  int base_channels = 64;
  /// Channel growth (doubling per level) stops here.
  int max_channels = 512;
  NormKind norm = NormKind::instance;

  bool operator==(const GeneratorSpec&) const = default;
};

/// Patch-wise critic; emits a grid of real/fake probabilities.
struct DiscriminatorSpec {
  /// Stride-2 convolutions before the two stride-1 output layers.
  int layers = 3;
  int base_channels = 64;
  NormKind norm = NormKind::instance;

  bool operator==(const DiscriminatorSpec&) const = default;
};

nlohmann::json to_json(const GeneratorSpec& spec);
nlohmann::json to_json(const DiscriminatorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);
DiscriminatorSpec discriminator_spec_from_json(const nlohmann::json& j);

/// Maps 3-channel images in [-1, 1] to 3-channel images in [-1, 1] of the
/// same spatial size (tanh output).
class UNetGeneratorImpl : public torch::nn::Module {
 public:
  explicit UNetGeneratorImpl(const GeneratorSpec& spec);

  /// Throws ValidationError unless both sides are divisible by 2^depth.
  torch::Tensor forward(const torch::Tensor& x);

  const GeneratorSpec& spec() const { return spec_; }

 private:
  GeneratorSpec spec_;
  std::vector<torch::nn::Sequential> down_;
  std::vector<torch::nn::Sequential> up_;
};
TORCH_MODULE(UNetGenerator);

/// PatchGAN-style critic. forward() returns sigmoid probabilities of shape
/// (N, 1, h, w); with NormKind::none each cell sees only a bounded window
/// (receptive_field() pixels square).
class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit PatchDiscriminatorImpl(const DiscriminatorSpec& spec);

  torch::Tensor forward(const torch::Tensor& x);

  const DiscriminatorSpec& spec() const { return spec_; }
  int receptive_field() const;

 private:
  DiscriminatorSpec spec_;
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

/// Normal(0, 0.02) conv weights and zero biases, as in the reference GAN code.
void init_gan_weights(torch::nn::Module& module);

}  // namespace nbi::translation
