#include "nbi/translation/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nbi/common/error.hpp"
#include "nbi/common/hash.hpp"
#include "nbi/data/tensor_convert.hpp"

namespace nbi::translation {
namespace {

std::string form_name(AdversarialForm f) { return f == AdversarialForm::log ? "log" : "least_squares"; }

AdversarialForm form_from_name(const std::string& s) {
  if (s == "log") return AdversarialForm::log;
  if (s == "least_squares") return AdversarialForm::least_squares;
  throw ValidationError("adversarial form must be log|least_squares, got '" + s + "'");
}

void set_requires_grad(torch::nn::Module& module, bool on) {
  for (auto& p : module.parameters()) p.set_requires_grad(on);
}

std::string describe(const char* name, double v) {
  std::ostringstream os;
  os << name << '=' << v;
  return os.str();
}

}  // namespace

void GanTrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("gan.epochs must be >= 1");
  if (!(initial_lr > 0)) throw ValidationError("gan.initial_lr must be > 0");
  if (batch_size < 1) throw ValidationError("gan.batch_size must be >= 1");
  if (canvas < 1) throw ValidationError("gan.canvas must be positive");
  if (crop < 0 || crop > canvas) throw ValidationError("gan.crop must be in [0, canvas]");
  const int side = crop > 0 ? crop : canvas;
  if (side % (1 << generator.depth) != 0)
    throw ValidationError("gan training side " + std::to_string(side) + " is not divisible by 2^" +
                          std::to_string(generator.depth));
  if (replay_capacity < 1) throw ValidationError("gan.replay_capacity must be >= 1");
  if (weights.cycle < 0 || weights.adversarial < 0) throw ValidationError("gan loss weights must be non-negative");
}

nlohmann::json to_json(const GanTrainConfig& c) {
  return {{"epochs", c.epochs},
          {"initial_lr", c.initial_lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"batch_size", c.batch_size},
          {"augment", c.augment},
          {"canvas", c.canvas},
          {"crop", c.crop},
          {"pad", c.pad.mode == data::PadMode::reflect ? "reflect" : "constant"},
          {"pad_fill", c.pad.fill},
          {"adversarial_form", form_name(c.form)},
          {"replay_buffer", c.replay_buffer},
          {"replay_capacity", c.replay_capacity},
          {"w_cyc", c.weights.cycle},
          {"w_gan", c.weights.adversarial},
          {"generator", to_json(c.generator)},
          {"discriminator", to_json(c.discriminator)},
          {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every}};
}

GanTrainConfig gan_config_from_json(const nlohmann::json& j) {
  GanTrainConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") c.epochs = value;
    else if (key == "initial_lr") c.initial_lr = value;
    else if (key == "beta1") c.beta1 = value;
    else if (key == "beta2") c.beta2 = value;
    else if (key == "batch_size") c.batch_size = value;
    else if (key == "augment") c.augment = value;
    else if (key == "canvas") c.canvas = value;
    else if (key == "crop") c.crop = value;
    else if (key == "pad") {
      const std::string mode = value;
      if (mode != "reflect" && mode != "constant") throw ValidationError("gan.pad must be reflect|constant");
      c.pad.mode = mode == "reflect" ? data::PadMode::reflect : data::PadMode::constant;
    } else if (key == "pad_fill") c.pad.fill = value;
    else if (key == "adversarial_form") c.form = form_from_name(value);
    else if (key == "replay_buffer") c.replay_buffer = value;
    else if (key == "replay_capacity") c.replay_capacity = value;
    else if (key == "w_cyc") c.weights.cycle = value;
    else if (key == "w_gan") c.weights.adversarial = value;
    else if (key == "generator") {
      auto g = to_json(c.generator);
      for (const auto& [k, v] : value.items()) {
        if (!g.contains(k)) throw ValidationError("unknown key gan.generator." + k);
        g[k] = v;
      }
      c.generator = generator_spec_from_json(g);
    } else if (key == "discriminator") {
      auto d = to_json(c.discriminator);
      for (const auto& [k, v] : value.items()) {
        if (!d.contains(k)) throw ValidationError("unknown key gan.discriminator." + k);
        d[k] = v;
      }
      c.discriminator = discriminator_spec_from_json(d);
    } else if (key == "seed") c.seed = value;
    else if (key == "checkpoint_every") c.checkpoint_every = value;
    else throw ValidationError("unknown key gan." + key);
  }
  return c;
}

double lr_factor(int epoch, int epochs) {
  const int constant = (epochs + 1) / 2;
  if (epoch < constant) return 1.0;
  const int decay = epochs - constant;
  return 1.0 - static_cast<double>(epoch - constant + 1) / static_cast<double>(decay + 1);
}

torch::Tensor ReplayBuffer::query(const torch::Tensor& images, Rng& rng) {
  std::vector<torch::Tensor> out;
  for (int64_t i = 0; i < images.size(0); ++i) {
    auto img = images[i].detach().clone();
    if (stored_.size() < static_cast<std::size_t>(capacity_)) {
      stored_.push_back(img);
      out.push_back(img);
    } else if (rng.coin()) {
      const auto slot = rng.below(stored_.size());
      out.push_back(stored_[slot]);
      stored_[slot] = img;
    } else {
      out.push_back(img);
    }
  }
  return torch::stack(out);
}

TranslationTrainer::TranslationTrainer(TranslationBundle& bundle, const GanTrainConfig& config)
    : bundle_(bundle),
      config_(config),
      generator_opt_(bundle.generator_parameters(),
                     torch::optim::AdamOptions(config.initial_lr).betas({config.beta1, config.beta2})),
      discriminator_opt_(bundle.discriminator_parameters(),
                         torch::optim::AdamOptions(config.initial_lr).betas({config.beta1, config.beta2})),
      wli_fakes_(config.replay_capacity),
      nbi_fakes_(config.replay_capacity),
      rng_(Rng(config.seed).fork(0x5eedULL)) {}

void TranslationTrainer::set_learning_rate(double lr) {
  for (auto* opt : {&generator_opt_, &discriminator_opt_})
    for (auto& group : opt->param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

GeneratorStepLoss TranslationTrainer::generator_step(const torch::Tensor& wli, const torch::Tensor& nbi) {
  auto& F = bundle_.wli_to_nbi;
  auto& G = bundle_.nbi_to_wli;
  auto& DX = bundle_.wli_critic;
  auto& DY = bundle_.nbi_critic;

  const auto fake_nbi = F->forward(wli);
  const auto fake_wli = G->forward(nbi);
  const auto cyc = cycle_loss_from(wli, G->forward(fake_nbi), nbi, F->forward(fake_wli));

  set_requires_grad(*DX, false);
  set_requires_grad(*DY, false);
  torch::Tensor dx_real, dy_real;
  {
    torch::NoGradGuard no_grad;
    dx_real = DX->forward(wli);
    dy_real = DY->forward(nbi);
  }
  const auto adv = generator_objective(config_.form, dx_real, DY->forward(fake_nbi), DX->forward(fake_wli), dy_real);
  const auto total = config_.weights.cycle * cyc.total() + config_.weights.adversarial * adv;

  GeneratorStepLoss loss{cyc.total().item<double>(), adv.item<double>()};
  if (!std::isfinite(total.item<double>())) {
    set_requires_grad(*DX, true);
    set_requires_grad(*DY, true);
    throw NumericalError("non-finite generator loss: " + describe("L_c_x", cyc.x_cycle.item<double>()) + " " +
                         describe("L_c_y", cyc.y_cycle.item<double>()) + " " +
                         describe("L_d_gen", loss.adversarial));
  }
  generator_opt_.zero_grad();
  total.backward();
  generator_opt_.step();
  set_requires_grad(*DX, true);
  set_requires_grad(*DY, true);
  return loss;
}

double TranslationTrainer::discriminator_step(const torch::Tensor& wli, const torch::Tensor& nbi) {
  auto& DX = bundle_.wli_critic;
  auto& DY = bundle_.nbi_critic;
  torch::Tensor fake_nbi, fake_wli;
  {
    torch::NoGradGuard no_grad;
    fake_nbi = bundle_.wli_to_nbi->forward(wli);
    fake_wli = bundle_.nbi_to_wli->forward(nbi);
  }
  if (config_.replay_buffer) {
    fake_nbi = nbi_fakes_.query(fake_nbi, rng_);
    fake_wli = wli_fakes_.query(fake_wli, rng_);
  }
  const auto dx_real = DX->forward(wli);
  const auto dy_real = DY->forward(nbi);
  const auto dy_fake = DY->forward(fake_nbi);
  const auto dx_fake = DX->forward(fake_wli);
  const auto objective = discriminator_objective(config_.form, dx_real, dy_fake, dx_fake, dy_real);
  const double value = objective.item<double>();
  if (!std::isfinite(value))
    throw NumericalError("non-finite discriminator loss: " + describe("objective", value));
  discriminator_opt_.zero_grad();
  objective.backward();
  discriminator_opt_.step();
  return config_.form == AdversarialForm::log ? -value : value;
}

torch::Tensor make_gan_batch(const data::DomainDataset& pool, const std::vector<std::size_t>& indices,
                             const GanTrainConfig& config, Rng& rng) {
  std::vector<data::Image> images;
  images.reserve(indices.size());
  for (auto i : indices) {
    data::Image img = data::pad_to_canvas(pool[i].image(), config.canvas, config.pad);
    if (config.crop > 0 && config.crop < config.canvas) {
      const auto range = static_cast<std::uint64_t>(config.canvas - config.crop + 1);
      const data::Offset off{static_cast<int>(rng.below(range)), static_cast<int>(rng.below(range))};
      img = data::crop(img, off, config.crop);
    }
    if (config.augment) img = data::dihedral_transform(img, static_cast<int>(rng.below(data::kDihedralOrder)));
    images.push_back(std::move(img));
  }
  std::vector<const data::Image*> ptrs;
  for (const auto& img : images) ptrs.push_back(&img);
  return data::to_tensor(ptrs);
}

TranslationBundle train_translation(const GanTrainConfig& config, const data::DomainDataset& wli,
                                    const data::DomainDataset& nbi, const EpochObserver& observer) {
  config.validate();
  if (wli.empty() || nbi.empty()) throw ValidationError("translation training needs nonempty WLI and NBI pools");

  auto bundle = TranslationBundle::create(config.generator, config.discriminator, config.weights, config.seed,
                                          config.canvas);
  bundle.config_hash = config_hash(to_json(config));
  TranslationTrainer trainer(bundle, config);
  Rng rng = Rng(config.seed).fork(0xda7aULL);

  std::ofstream log;
  if (!config.loss_log.empty()) {
    const bool fresh = !std::filesystem::exists(config.loss_log);
    if (config.loss_log.has_parent_path()) std::filesystem::create_directories(config.loss_log.parent_path());
    log.open(config.loss_log, std::ios::app);
    if (!log) throw IoError("cannot open loss log " + config.loss_log.string());
    if (fresh) log << "epoch,L_c,L_d_gen,L_d_disc\n";
  }

  std::vector<std::size_t> order_x(wli.size()), order_y(nbi.size());
  const std::size_t per_epoch = std::max(wli.size(), nbi.size());
  const auto bs = static_cast<std::size_t>(config.batch_size);
  const std::size_t iterations = (per_epoch + bs - 1) / bs;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    trainer.set_learning_rate(config.initial_lr * lr_factor(epoch, config.epochs));
    std::iota(order_x.begin(), order_x.end(), 0);
    std::iota(order_y.begin(), order_y.end(), 0);
    rng.shuffle(std::span<std::size_t>(order_x));
    rng.shuffle(std::span<std::size_t>(order_y));

    EpochLoss sums;
    sums.epoch = epoch;
    for (std::size_t it = 0; it < iterations; ++it) {
      std::vector<std::size_t> bx, by;
      for (std::size_t j = 0; j < bs; ++j) {
        bx.push_back(order_x[(it * bs + j) % order_x.size()]);
        by.push_back(order_y[(it * bs + j) % order_y.size()]);
      }
      const auto x = make_gan_batch(wli, bx, config, rng);
      const auto y = make_gan_batch(nbi, by, config, rng);
      try {
        const auto g = trainer.generator_step(x, y);
        sums.cycle += g.cycle;
        sums.adversarial_generator += g.adversarial;
        sums.adversarial_discriminator += trainer.discriminator_step(x, y);
      } catch (const NumericalError& e) {
        throw NumericalError("epoch " + std::to_string(epoch) + " iteration " + std::to_string(it) + ": " + e.what());
      }
    }
    const auto n = static_cast<double>(iterations);
    sums.cycle /= n;
    sums.adversarial_generator /= n;
    sums.adversarial_discriminator /= n;
    bundle.epoch = epoch + 1;

    if (log) {
      log << sums.epoch << ',' << sums.cycle << ',' << sums.adversarial_generator << ','
          << sums.adversarial_discriminator << '\n';
      log.flush();
    }
    if (observer) observer(sums);
    if (config.checkpoint_every > 0 && !config.checkpoint_path.empty() && (epoch + 1) % config.checkpoint_every == 0)
      bundle.save(config.checkpoint_path);
  }
  return bundle;
}

}  // namespace nbi::translation
