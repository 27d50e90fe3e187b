#include "nbi/translation/networks.hpp"

#include <algorithm>

#include "nbi/common/error.hpp"

namespace nbi::translation {
namespace {

using namespace torch::nn;

std::string norm_name(NormKind n) { return n == NormKind::instance ? "instance" : "none"; }

NormKind norm_from_name(const std::string& s) {
  if (s == "instance") return NormKind::instance;
  if (s == "none") return NormKind::none;
  throw ValidationError("unknown norm kind '" + s + "'");
}

void push_norm(Sequential& seq, NormKind norm, int channels) {
  if (norm == NormKind::instance) seq->push_back(InstanceNorm2d(InstanceNorm2dOptions(channels)));
}

Conv2dOptions down_conv(int in, int out) { return Conv2dOptions(in, out, 4).stride(2).padding(1); }

ConvTranspose2dOptions up_conv(int in, int out) { return ConvTranspose2dOptions(in, out, 4).stride(2).padding(1); }

}  // namespace

nlohmann::json to_json(const GeneratorSpec& s) {
  return {{"depth", s.depth}, {"base_channels", s.base_channels}, {"max_channels", s.max_channels},
          {"norm", norm_name(s.norm)}};
}

nlohmann::json to_json(const DiscriminatorSpec& s) {
  return {{"layers", s.layers}, {"base_channels", s.base_channels}, {"norm", norm_name(s.norm)}};
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  s.depth = j.at("depth");
  s.base_channels = j.at("base_channels");
  s.max_channels = j.at("max_channels");
  s.norm = norm_from_name(j.at("norm"));
  return s;
}

DiscriminatorSpec discriminator_spec_from_json(const nlohmann::json& j) {
  DiscriminatorSpec s;
  s.layers = j.at("layers");
  s.base_channels = j.at("base_channels");
  s.norm = norm_from_name(j.at("norm"));
  return s;
}

UNetGeneratorImpl::UNetGeneratorImpl(const GeneratorSpec& spec) : spec_(spec) {
  if (spec.depth < 1 || spec.base_channels < 1 || spec.max_channels < spec.base_channels)
    throw ValidationError("invalid generator spec");
  std::vector<int> channels;
  for (int i = 0; i < spec.depth; ++i) channels.push_back(std::min(spec.base_channels << i, spec.max_channels));

  // Encoder: the outermost and innermost levels go without normalization.
  int in = 3;
  for (int i = 0; i < spec.depth; ++i) {
    Sequential level;
    level->push_back(Conv2d(down_conv(in, channels[i])));
    if (i > 0 && i < spec.depth - 1) push_norm(level, spec.norm, channels[i]);
    level->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
    down_.push_back(register_module("down" + std::to_string(i), level));
    in = channels[i];
  }
  // Decoder, innermost first. Every level but the innermost consumes the
  // concatenation of the previous decoder output and the encoder skip.
  for (int i = spec.depth - 1; i >= 0; --i) {
    const int level_in = (i == spec.depth - 1) ? channels[i] : 2 * channels[i];
    const int level_out = i > 0 ? channels[i - 1] : 3;
    Sequential level;
    level->push_back(ConvTranspose2d(up_conv(level_in, level_out)));
    if (i > 0) {
      push_norm(level, spec.norm, level_out);
      level->push_back(ReLU());
    } else {
      level->push_back(Tanh());
    }
    up_.push_back(register_module("up" + std::to_string(i), level));
  }
}

torch::Tensor UNetGeneratorImpl::forward(const torch::Tensor& x) {
  const int64_t unit = int64_t{1} << spec_.depth;
  if (x.dim() != 4 || x.size(1) != 3) throw ValidationError("generator expects (N, 3, H, W) input");
  if (x.size(2) % unit != 0 || x.size(3) % unit != 0)
    throw ValidationError("generator input " + std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)) +
                          " is not divisible by 2^" + std::to_string(spec_.depth));
  std::vector<torch::Tensor> skips;
  torch::Tensor h = x;
  for (auto& level : down_) {
    h = level->forward(h);
    skips.push_back(h);
  }
  for (std::size_t j = 0; j < up_.size(); ++j) {
    if (j > 0) h = torch::cat({h, skips[skips.size() - 1 - j]}, 1);
    h = up_[j]->forward(h);
  }
  return h;
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(const DiscriminatorSpec& spec) : spec_(spec) {
  if (spec.layers < 1 || spec.base_channels < 1) throw ValidationError("invalid discriminator spec");
  Sequential seq;
  seq->push_back(Conv2d(Conv2dOptions(3, spec.base_channels, 4).stride(2).padding(1)));
  seq->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
  int mult = 1;
  for (int i = 1; i < spec.layers; ++i) {
    const int prev = mult;
    mult = std::min(1 << i, 8);
    seq->push_back(Conv2d(Conv2dOptions(spec.base_channels * prev, spec.base_channels * mult, 4).stride(2).padding(1)));
    push_norm(seq, spec.norm, spec.base_channels * mult);
    seq->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
  }
  const int prev = mult;
  mult = std::min(1 << spec.layers, 8);
  seq->push_back(Conv2d(Conv2dOptions(spec.base_channels * prev, spec.base_channels * mult, 4).stride(1).padding(1)));
  push_norm(seq, spec.norm, spec.base_channels * mult);
  seq->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
  seq->push_back(Conv2d(Conv2dOptions(spec.base_channels * mult, 1, 4).stride(1).padding(1)));
  seq->push_back(Sigmoid());
  body_ = register_module("body", seq);
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& x) { return body_->forward(x); }

int PatchDiscriminatorImpl::receptive_field() const {
  // Walk back from one output cell through the kernel-4 convolutions:
  // `layers` with stride 2, then two with stride 1.
  int field = 1;
  for (int i = 0; i < 2; ++i) field = field + 3;
  for (int i = 0; i < spec_.layers; ++i) field = 2 * field + 2;
  return field;
}

void init_gan_weights(torch::nn::Module& module) {
  torch::NoGradGuard no_grad;
  for (auto& m : module.modules(true)) {
    if (auto* conv = m->as<Conv2dImpl>()) {
      init::normal_(conv->weight, 0.0, 0.02);
      if (conv->bias.defined()) init::zeros_(conv->bias);
    } else if (auto* deconv = m->as<ConvTranspose2dImpl>()) {
      init::normal_(deconv->weight, 0.0, 0.02);
      if (deconv->bias.defined()) init::zeros_(deconv->bias);
    }
  }
}

}  // namespace nbi::translation
