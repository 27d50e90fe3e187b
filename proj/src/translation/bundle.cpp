#include "nbi/translation/bundle.hpp"

#include "nbi/common/error.hpp"

namespace nbi::translation {

TranslationBundle TranslationBundle::create(const GeneratorSpec& generator, const DiscriminatorSpec& discriminator,
                                            const LossWeights& weights, std::uint64_t seed, int canvas) {
  if (weights.cycle < 0 || weights.adversarial < 0) throw ValidationError("loss weights must be non-negative");
  if (canvas % (1 << generator.depth) != 0)
    throw ValidationError("canvas " + std::to_string(canvas) + " is not divisible by 2^" +
                          std::to_string(generator.depth));
  torch::manual_seed(seed);
  TranslationBundle b;
  b.generator_spec = generator;
  b.discriminator_spec = discriminator;
  b.weights = weights;
  b.wli_to_nbi = UNetGenerator(generator);
  b.nbi_to_wli = UNetGenerator(generator);
  b.wli_critic = PatchDiscriminator(discriminator);
  b.nbi_critic = PatchDiscriminator(discriminator);
  for (torch::nn::Module* m : {static_cast<torch::nn::Module*>(b.wli_to_nbi.get()),
                               static_cast<torch::nn::Module*>(b.nbi_to_wli.get()),
                               static_cast<torch::nn::Module*>(b.wli_critic.get()),
                               static_cast<torch::nn::Module*>(b.nbi_critic.get())})
    init_gan_weights(*m);
  b.seed = seed;
  b.canvas = canvas;
  return b;
}

std::vector<torch::Tensor> TranslationBundle::generator_parameters() const {
  auto params = wli_to_nbi->parameters();
  auto more = nbi_to_wli->parameters();
  params.insert(params.end(), more.begin(), more.end());
  return params;
}

std::vector<torch::Tensor> TranslationBundle::discriminator_parameters() const {
  auto params = wli_critic->parameters();
  auto more = nbi_critic->parameters();
  params.insert(params.end(), more.begin(), more.end());
  return params;
}

void TranslationBundle::to(torch::Dtype dtype) {
  wli_to_nbi->to(dtype);
  nbi_to_wli->to(dtype);
  wli_critic->to(dtype);
  nbi_critic->to(dtype);
}

Checkpoint TranslationBundle::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.meta = {{"kind", "translation"},
               {"generator", to_json(generator_spec)},
               {"discriminator", to_json(discriminator_spec)},
               {"weights", {{"cycle", weights.cycle}, {"adversarial", weights.adversarial}}},
               {"epoch", epoch},
               {"seed", seed},
               {"canvas", canvas},
               {"config_hash", config_hash}};
  append_module_state(ckpt.tensors, *wli_to_nbi, "wli_to_nbi.");
  append_module_state(ckpt.tensors, *nbi_to_wli, "nbi_to_wli.");
  append_module_state(ckpt.tensors, *wli_critic, "wli_critic.");
  append_module_state(ckpt.tensors, *nbi_critic, "nbi_critic.");
  return ckpt;
}

TranslationBundle TranslationBundle::from_checkpoint(const Checkpoint& ckpt) {
  const auto& meta = ckpt.meta;
  if (meta.value("kind", "") != "translation") throw ValidationError("checkpoint is not a translation bundle");
  LossWeights weights{meta.at("weights").at("cycle"), meta.at("weights").at("adversarial")};
  auto b = create(generator_spec_from_json(meta.at("generator")), discriminator_spec_from_json(meta.at("discriminator")),
                  weights, meta.at("seed").get<std::uint64_t>(), meta.at("canvas").get<int>());
  b.epoch = meta.at("epoch");
  b.config_hash = meta.at("config_hash");
  load_module_state(*b.wli_to_nbi, ckpt, "wli_to_nbi.");
  load_module_state(*b.nbi_to_wli, ckpt, "nbi_to_wli.");
  load_module_state(*b.wli_critic, ckpt, "wli_critic.");
  load_module_state(*b.nbi_critic, ckpt, "nbi_critic.");
  return b;
}

void TranslationBundle::save(const std::filesystem::path& path) const { save_checkpoint(path, to_checkpoint()); }

TranslationBundle TranslationBundle::load(const std::filesystem::path& path) {
  return from_checkpoint(load_checkpoint(path));
}

}  // namespace nbi::translation
