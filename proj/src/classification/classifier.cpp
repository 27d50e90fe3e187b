#include "nbi/classification/classifier.hpp"

#include "nbi/common/error.hpp"

namespace nbi::classification {
namespace {

using namespace torch::nn;

struct ConvLayer {
  int out;
  int kernel;
  int stride;
  int padding;
  bool lrn;
};

// Pooling: 3x3/2 max pool (AlexNet, VGG-f, ceil mode for VGG-f) or 2x2/2 (VGG-16).
void add_alexnet_like(Sequential& seq, const std::vector<ConvLayer>& convs, const std::vector<bool>& pool_after,
                      bool ceil_pool) {
  int in = 3;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& c = convs[i];
    seq->push_back(Conv2d(Conv2dOptions(in, c.out, c.kernel).stride(c.stride).padding(c.padding)));
    seq->push_back(ReLU());
    if (c.lrn) seq->push_back(LocalResponseNorm(LocalResponseNormOptions(5).alpha(1e-4).beta(0.75).k(2.0)));
    if (pool_after[i]) seq->push_back(MaxPool2d(MaxPool2dOptions(3).stride(2).ceil_mode(ceil_pool)));
    in = c.out;
  }
}

}  // namespace

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::alexnet: return "alexnet";
    case Architecture::vggf: return "vggf";
    case Architecture::vgg16: return "vgg16";
  }
  return "?";
}

std::optional<Architecture> parse_architecture(std::string_view text) {
  if (text == "alexnet") return Architecture::alexnet;
  if (text == "vggf") return Architecture::vggf;
  if (text == "vgg16") return Architecture::vgg16;
  return std::nullopt;
}

std::string_view to_string(Scale s) { return s == Scale::full ? "full" : "compact"; }

ClassifierSpec ClassifierSpec::make(Architecture architecture, Scale scale) {
  ClassifierSpec s;
  s.architecture = architecture;
  s.scale = scale;
  const bool alex = architecture == Architecture::alexnet;
  s.crop_size = scale == Scale::full ? (alex ? 227 : 224) : (alex ? 57 : 56);
  return s;
}

nlohmann::json to_json(const ClassifierSpec& s) {
  return {{"architecture", to_string(s.architecture)},
          {"scale", to_string(s.scale)},
          {"crop_size", s.crop_size},
          {"output_dim", s.output_dim}};
}

ClassifierSpec classifier_spec_from_json(const nlohmann::json& j) {
  const auto arch = parse_architecture(j.at("architecture").get<std::string>());
  if (!arch) throw ValidationError("unknown architecture '" + j.at("architecture").get<std::string>() + "'");
  const std::string scale = j.value("scale", "full");
  if (scale != "full" && scale != "compact") throw ValidationError("scale must be full|compact");
  auto s = ClassifierSpec::make(*arch, scale == "full" ? Scale::full : Scale::compact);
  if (j.contains("crop_size")) s.crop_size = j.at("crop_size");
  if (j.contains("output_dim")) s.output_dim = j.at("output_dim");
  return s;
}

ClassifierImpl::ClassifierImpl(const ClassifierSpec& spec) : spec_(spec) {
  if (spec.output_dim < 2) throw ValidationError("classifier needs at least 2 outputs");
  if (spec.crop_size < 1) throw ValidationError("crop size must be positive");
  const bool full = spec.scale == Scale::full;
  const int div = full ? 1 : 8;
  const int hidden = full ? 4096 : 128;
  auto ch = [&](int c) { return c / div; };

  Sequential features;
  int grid = 6;
  int last_channels = 0;
  switch (spec.architecture) {
    case Architecture::alexnet: {
      const ConvLayer stem = full ? ConvLayer{ch(96), 11, 4, 0, true} : ConvLayer{ch(96), 5, 2, 2, true};
      add_alexnet_like(features,
                       {stem, {ch(256), 5, 1, 2, true}, {ch(384), 3, 1, 1, false}, {ch(384), 3, 1, 1, false},
                        {ch(256), 3, 1, 1, false}},
                       {true, true, false, false, true}, false);
      last_channels = ch(256);
      break;
    }
    case Architecture::vggf: {
      const ConvLayer stem = full ? ConvLayer{ch(64), 11, 4, 0, true} : ConvLayer{ch(64), 5, 2, 2, true};
      add_alexnet_like(features,
                       {stem, {ch(256), 5, 1, 2, true}, {ch(256), 3, 1, 1, false}, {ch(256), 3, 1, 1, false},
                        {ch(256), 3, 1, 1, false}},
                       {true, true, false, false, true}, true);
      last_channels = ch(256);
      break;
    }
    case Architecture::vgg16: {
      const std::vector<std::vector<int>> blocks = {{64, 64}, {128, 128}, {256, 256, 256}, {512, 512, 512}, {512, 512, 512}};
      int in = 3;
      for (const auto& block : blocks) {
        for (int c : block) {
          features->push_back(Conv2d(Conv2dOptions(in, ch(c), 3).padding(1)));
          features->push_back(ReLU());
          in = ch(c);
        }
        features->push_back(MaxPool2d(MaxPool2dOptions(2).stride(2)));
      }
      last_channels = in;
      grid = 7;
      break;
    }
  }
  if (!full) grid = 1;
  features_ = register_module("features", features);
  pool_ = register_module("pool", AdaptiveAvgPool2d(AdaptiveAvgPool2dOptions({grid, grid})));

  Sequential head;
  head->push_back(Flatten());
  head->push_back(Linear(last_channels * grid * grid, hidden));
  head->push_back(ReLU());
  head->push_back(Dropout(0.5));
  head->push_back(Linear(hidden, hidden));
  head->push_back(ReLU());
  head->push_back(Dropout(0.5));
  head->push_back(Linear(hidden, spec.output_dim));
  head_ = register_module("head", head);
}

torch::Tensor ClassifierImpl::forward(const torch::Tensor& x) {
  return head_->forward(pool_->forward(features_->forward(x)));
}

torch::Tensor ClassifierImpl::probabilities(const torch::Tensor& x) { return torch::softmax(forward(x), 1); }

Classifier build_classifier(const ClassifierSpec& spec, std::uint64_t seed) {
  torch::manual_seed(seed);
  Classifier net(spec);
  torch::NoGradGuard no_grad;
  std::vector<LinearImpl*> linears;
  for (auto& m : net->modules(false)) {
    if (auto* conv = m->as<Conv2dImpl>()) {
      init::kaiming_normal_(conv->weight, 0.0, torch::kFanOut, torch::kReLU);
      init::zeros_(conv->bias);
    } else if (auto* lin = m->as<LinearImpl>()) {
      linears.push_back(lin);
    }
  }
  for (std::size_t i = 0; i < linears.size(); ++i) {
    // N(0, 0.01) suits 4096-wide layers; on the 128-wide compact head it
    // shrinks the signal ~100x per layer and training never starts.
    if (spec.scale == Scale::full)
      init::normal_(linears[i]->weight, 0.0, 0.01);
    else if (i + 1 < linears.size())
      init::kaiming_normal_(linears[i]->weight, 0.0, torch::kFanIn, torch::kReLU);
    else
      init::xavier_normal_(linears[i]->weight);
    init::zeros_(linears[i]->bias);
  }
  return net;
}

Checkpoint classifier_checkpoint(const Classifier& classifier, const nlohmann::json& meta) {
  Checkpoint ckpt;
  ckpt.meta = meta;
  ckpt.meta["kind"] = "classifier";
  ckpt.meta["spec"] = to_json(classifier->spec());
  append_module_state(ckpt.tensors, *classifier, "");
  return ckpt;
}

Classifier classifier_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.value("kind", "") != "classifier") throw ValidationError("checkpoint is not a classifier");
  Classifier net(classifier_spec_from_json(ckpt.meta.at("spec")));
  load_module_state(*net, ckpt, "");
  return net;
}

}  // namespace nbi::classification
