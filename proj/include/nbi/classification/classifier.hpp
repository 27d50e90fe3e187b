#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>
#include <torch/torch.h>

#include "nbi/common/checkpoint.hpp"

namespace nbi::classification {

enum class Architecture { alexnet, vggf, vgg16 };

/// full: the published layer tables at 224/227 input.
/// compact: same layer pattern with 1/8 of the conv channels, a stride-2
/// 5x5 stem instead of the 11x11/4 one (AlexNet, VGG-f), global average
/// pooling and 128-wide hidden layers; meant for 64-pixel patches.
enum class Scale { full, compact };

std::string_view to_string(Architecture a);
std::optional<Architecture> parse_architecture(std::string_view text);
std::string_view to_string(Scale s);

struct ClassifierSpec {
  Architecture architecture = Architecture::vggf;
  Scale scale = Scale::full;
  /// Training crops and test center crops are crop_size x crop_size.
  int crop_size = 224;
  int output_dim = 2;

  /// Crop sizes: full 227 (AlexNet) / 224 (others); compact 57 / 56.
  static ClassifierSpec make(Architecture architecture, Scale scale = Scale::full);

  bool operator==(const ClassifierSpec&) const = default;
};

nlohmann::json to_json(const ClassifierSpec& spec);
ClassifierSpec classifier_spec_from_json(const nlohmann::json& j);

class ClassifierImpl : public torch::nn::Module {
 public:
  explicit ClassifierImpl(const ClassifierSpec& spec);

  /// (N, 3, crop, crop) -> (N, output_dim) logits.
  torch::Tensor forward(const torch::Tensor& x);
  /// Softmax of forward().
  torch::Tensor probabilities(const torch::Tensor& x);

  const ClassifierSpec& spec() const { return spec_; }

 private:
  ClassifierSpec spec_;
  torch::nn::Sequential features_{nullptr};
  torch::nn::AdaptiveAvgPool2d pool_{nullptr};
  torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(Classifier);

/// Randomly initialized classifier (He-normal convolutions, N(0, 0.01)
/// linear layers except the compact hidden ones, which are He-normal; zero
/// biases), bit-identical for equal seeds.
/// Throws ValidationError for output_dim < 2 or a non-positive crop size.
Classifier build_classifier(const ClassifierSpec& spec, std::uint64_t seed);

Checkpoint classifier_checkpoint(const Classifier& classifier, const nlohmann::json& meta);
Classifier classifier_from_checkpoint(const Checkpoint& ckpt);

}  // namespace nbi::classification
