#include "support/doctest.hpp"

#include <cmath>
#include <fstream>

#include "nbi/common/error.hpp"
#include "nbi/data/synthetic.hpp"
#include "nbi/translation/bundle.hpp"
#include "nbi/translation/losses.hpp"
#include "nbi/translation/networks.hpp"
#include "nbi/translation/trainer.hpp"
#include "nbi/translation/translate.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace nbi;
using namespace nbi::translation;

namespace {

GanTrainConfig tiny_config() {
  GanTrainConfig c;
  c.epochs = 2;
  c.initial_lr = 1e-3;
  c.batch_size = 2;
  c.canvas = 16;
  c.generator = {2, 4, 8, NormKind::instance};
  c.discriminator = {1, 4, NormKind::instance};
  c.seed = 5;
  return c;
}

std::vector<torch::Tensor> snapshot(const std::vector<torch::Tensor>& params) {
  std::vector<torch::Tensor> out;
  for (const auto& p : params) out.push_back(p.detach().clone());
  return out;
}

bool unchanged(const std::vector<torch::Tensor>& before, const std::vector<torch::Tensor>& now) {
  for (std::size_t i = 0; i < before.size(); ++i)
    if (!torch::equal(before[i], now[i].detach())) return false;
  return true;
}

data::DomainDataset small_pool(data::DomainTag tag, int n, int side) {
  return testing::toy_dataset(tag, [&] {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
    return ids;
  }(), 1, side);
}

}  // namespace

TEST_CASE("generator keeps shape and range") {
  torch::manual_seed(0);
  UNetGenerator g(GeneratorSpec{3, 4, 16, NormKind::instance});
  const auto x = torch::rand({2, 3, 16, 16}) * 2 - 1;
  const auto y = g->forward(x);
  CHECK(y.sizes() == x.sizes());
  CHECK(y.abs().max().item<float>() <= 1.0f);
  CHECK_THROWS_AS(g->forward(torch::zeros({1, 3, 12, 12})), ValidationError);
  CHECK_THROWS_AS(g->forward(torch::zeros({1, 1, 16, 16})), ValidationError);
}

TEST_CASE("patch discriminator emits a probability grid") {
  torch::manual_seed(0);
  PatchDiscriminator d(DiscriminatorSpec{3, 4, NormKind::instance});
  CHECK(d->receptive_field() == 70);
  const auto out = d->forward(torch::rand({2, 3, 64, 64}) * 2 - 1);
  CHECK(out.dim() == 4);
  CHECK(out.size(0) == 2);
  CHECK(out.size(1) == 1);
  CHECK(out.size(2) > 1);
  CHECK(out.min().item<float>() > 0.0f);
  CHECK(out.max().item<float>() < 1.0f);
}

TEST_CASE("property: an unnormalized critic cell only sees its window") {
  torch::manual_seed(1);
  PatchDiscriminator d(DiscriminatorSpec{3, 4, NormKind::none});
  torch::NoGradGuard ng;
  const auto x = torch::rand({1, 3, 128, 128}) * 2 - 1;
  const auto base = d->forward(x);
  auto far = x.clone();
  far.index_put_({0, torch::indexing::Slice(), 120, 120}, 1.0);
  CHECK(d->forward(far)[0][0][0][0].item<float>() == base[0][0][0][0].item<float>());
  auto near = x.clone();
  near.index_put_({0, torch::indexing::Slice(), 3, 3}, -x.index({0, torch::indexing::Slice(), 3, 3}));
  CHECK(d->forward(near)[0][0][0][0].item<float>() != base[0][0][0][0].item<float>());
}

TEST_CASE("cycle loss equals the scalar oracle") {
  torch::manual_seed(2);
  const auto x = torch::rand({3, 3, 4, 4}, torch::kFloat64) * 2 - 1;
  const auto y = torch::rand({2, 3, 4, 4}, torch::kFloat64) * 2 - 1;
  ImageMap F = [](const torch::Tensor& t) { return torch::tanh(0.7 * t + 0.1); };
  ImageMap G = [](const torch::Tensor& t) { return 0.9 * t.flip({3}) - 0.05; };
  const auto loss = cycle_loss(F, G, x, y);
  const double ox = oracle::mean_abs(oracle::flat(G(F(x))), oracle::flat(x));
  const double oy = oracle::mean_abs(oracle::flat(F(G(y))), oracle::flat(y));
  CHECK(loss.x_cycle.item<double>() == doctest::Approx(ox).epsilon(1e-12));
  CHECK(loss.total().item<double>() == doctest::Approx(ox + oy).epsilon(1e-12));
  ImageMap id = [](const torch::Tensor& t) { return t; };
  CHECK(cycle_loss(id, id, x, y).total().item<double>() == 0.0);
  ImageMap shrink = [](const torch::Tensor& t) { return t.narrow(3, 0, 2); };
  CHECK_THROWS_AS(cycle_loss(shrink, id, x, y), ValidationError);
}

TEST_CASE("adversarial loss equals the scalar oracle") {
  torch::manual_seed(3);
  const auto x = torch::rand({3, 3, 8, 8}, torch::kFloat64);
  const auto y = torch::rand({2, 3, 8, 8}, torch::kFloat64);
  ImageMap F = [](const torch::Tensor& t) { return t.pow(2); };
  ImageMap G = [](const torch::Tensor& t) { return 1 - t; };
  Critic DX = [](const torch::Tensor& t) { return torch::sigmoid(t.mean(1, true).narrow(2, 0, 4).narrow(3, 0, 4)); };
  Critic DY = [](const torch::Tensor& t) { return torch::sigmoid(2 * t.mean(1, true) - 0.5); };
  const double got = adversarial_loss(F, G, DX, DY, x, y).item<double>();
  const double want = oracle::adversarial(oracle::flat(DX(x)), oracle::flat(DY(F(x))), oracle::flat(DX(G(y))),
                                          oracle::flat(DY(y)), 3, 2);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("a critic at one half gives four log one half") {
  const auto x = torch::zeros({2, 3, 4, 4}, torch::kFloat64);
  ImageMap id = [](const torch::Tensor& t) { return t; };
  Critic half = [](const torch::Tensor& t) { return torch::full({t.size(0), 1, 3, 3}, 0.5, t.options()); };
  const double v = adversarial_loss(id, id, half, half, x, x).item<double>();
  CHECK(std::abs(v - 4 * std::log(0.5)) < 1e-9);
}

TEST_CASE("critic probabilities are clamped and validated") {
  const auto zeros = torch::zeros({2, 1, 2, 2}, torch::kFloat64);
  const auto ones = torch::ones({2, 1, 2, 2}, torch::kFloat64);
  const auto terms = adversarial_terms(zeros, ones, ones, zeros);
  CHECK(std::isfinite(terms.value().item<double>()));
  CHECK(terms.real_x.item<double>() == doctest::Approx(std::log(kProbabilityClamp)));
  auto nan = zeros.clone();
  nan[0][0][0][0] = std::nan("");
  CHECK_THROWS_AS(image_probability(nan), InternalError);
  CHECK_THROWS_AS(image_probability(ones * 2), InternalError);
}

TEST_CASE("generator and discriminator objectives") {
  const auto r = torch::full({2, 1, 2, 2}, 0.8, torch::kFloat64);
  const auto f = torch::full({2, 1, 2, 2}, 0.3, torch::kFloat64);
  const double ld = 2 * std::log(0.8) + 2 * std::log(0.7);
  CHECK(generator_objective(AdversarialForm::log, r, f, f, r).item<double>() == doctest::Approx(ld));
  CHECK(discriminator_objective(AdversarialForm::log, r, f, f, r).item<double>() == doctest::Approx(-ld));
  CHECK(generator_objective(AdversarialForm::least_squares, r, f, f, r).item<double>() ==
        doctest::Approx(2 * 0.49));
  CHECK(discriminator_objective(AdversarialForm::least_squares, r, f, f, r).item<double>() ==
        doctest::Approx(2 * (0.04 + 0.09)));
}

TEST_CASE("gradients of both losses match central differences") {
  auto bundle = TranslationBundle::create({1, 2, 2, NormKind::instance}, {1, 2, NormKind::none}, {}, 4, 8);
  bundle.to(torch::kFloat64);
  torch::manual_seed(4);
  {
    // Spread the weights so no critic sits at exactly one half.
    torch::NoGradGuard ng;
    for (auto p : bundle.generator_parameters()) p.normal_(0.0, 0.3);
    for (auto p : bundle.discriminator_parameters()) p.normal_(0.0, 0.3);
  }
  const auto x = torch::rand({2, 3, 8, 8}, torch::kFloat64) * 2 - 1;
  const auto y = torch::rand({2, 3, 8, 8}, torch::kFloat64) * 2 - 1;
  auto loss = [&] {
    ImageMap F = [&](const torch::Tensor& t) { return bundle.wli_to_nbi->forward(t); };
    ImageMap G = [&](const torch::Tensor& t) { return bundle.nbi_to_wli->forward(t); };
    Critic DX = [&](const torch::Tensor& t) { return bundle.wli_critic->forward(t); };
    Critic DY = [&](const torch::Tensor& t) { return bundle.nbi_critic->forward(t); };
    return cycle_loss(F, G, x, y).total() + adversarial_loss(F, G, DX, DY, x, y);
  };
  auto params = bundle.generator_parameters();
  const auto disc = bundle.discriminator_parameters();
  params.insert(params.end(), disc.begin(), disc.end());
  for (auto& p : params) p.mutable_grad() = torch::Tensor();
  loss().backward();
  double diff = 0, norm_a = 0, norm_n = 0;
  torch::NoGradGuard ng;
  for (auto& p : params) {
    auto flat = p.view(-1);
    const auto grad = p.grad().view(-1);
    for (int64_t i = 0; i < flat.numel(); ++i) {
      const double orig = flat[i].item<double>();
      flat[i] = orig + 1e-6;
      const double up = loss().item<double>();
      flat[i] = orig - 1e-6;
      const double down = loss().item<double>();
      flat[i] = orig;
      const double numeric = (up - down) / 2e-6;
      const double analytic = grad[i].item<double>();
      diff += (numeric - analytic) * (numeric - analytic);
      norm_a += analytic * analytic;
      norm_n += numeric * numeric;
    }
  }
  CHECK(std::sqrt(diff) / std::max(std::sqrt(norm_a), std::sqrt(norm_n)) < 1e-4);
}

TEST_CASE("each step only moves its own networks") {
  auto config = tiny_config();
  auto bundle = TranslationBundle::create(config.generator, config.discriminator, config.weights, 1, 16);
  TranslationTrainer trainer(bundle, config);
  const auto x = torch::rand({2, 3, 16, 16}) * 2 - 1;
  const auto y = torch::rand({2, 3, 16, 16}) * 2 - 1;

  auto gen0 = snapshot(bundle.generator_parameters());
  auto disc0 = snapshot(bundle.discriminator_parameters());
  trainer.generator_step(x, y);
  CHECK_FALSE(unchanged(gen0, bundle.generator_parameters()));
  CHECK(unchanged(disc0, bundle.discriminator_parameters()));

  gen0 = snapshot(bundle.generator_parameters());
  trainer.discriminator_step(x, y);
  CHECK(unchanged(gen0, bundle.generator_parameters()));
  CHECK_FALSE(unchanged(disc0, bundle.discriminator_parameters()));

  trainer.set_learning_rate(0.0);
  gen0 = snapshot(bundle.generator_parameters());
  disc0 = snapshot(bundle.discriminator_parameters());
  trainer.generator_step(x, y);
  trainer.discriminator_step(x, y);
  CHECK(unchanged(gen0, bundle.generator_parameters()));
  CHECK(unchanged(disc0, bundle.discriminator_parameters()));
}

TEST_CASE("learning rate: constant, then linear decay") {
  CHECK(lr_factor(0, 1000) == 1.0);
  CHECK(lr_factor(499, 1000) == 1.0);
  CHECK(lr_factor(500, 1000) == doctest::Approx(1.0 - 1.0 / 501));
  CHECK(lr_factor(999, 1000) == doctest::Approx(1.0 / 501));
  for (int e = 1; e < 200; ++e) CHECK(lr_factor(e, 200) <= lr_factor(e - 1, 200));
  CHECK(lr_factor(0, 1) == 1.0);
}

TEST_CASE("gan config json: defaults, round trip, unknown keys") {
  const GanTrainConfig d;
  CHECK(d.epochs == 1000);
  CHECK(d.initial_lr == 1e-5);
  CHECK(d.canvas == 768);
  CHECK((d.weights == LossWeights{1.0, 1.0}));
  auto c = tiny_config();
  c.form = AdversarialForm::least_squares;
  c.replay_buffer = true;
  const auto back = gan_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS_AS(gan_config_from_json({{"epochz", 3}}), ValidationError);
  CHECK_THROWS_AS(gan_config_from_json({{"generator", {{"levels", 3}}}}), ValidationError);
  c.canvas = 18;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("replay buffer fills, then mixes") {
  ReplayBuffer buffer(3);
  Rng rng(0);
  const auto a = torch::zeros({2, 3, 2, 2});
  CHECK(torch::equal(buffer.query(a, rng), a));
  CHECK(buffer.size() == 2);
  const auto b = torch::ones({4, 3, 2, 2});
  const auto out = buffer.query(b, rng);
  CHECK(out.size(0) == 4);
  CHECK(buffer.size() == 3);
}

TEST_CASE("one epoch on a tiny pool logs one record") {
  testing::TempDir dir("nbi_gan");
  auto config = tiny_config();
  config.epochs = 1;
  config.loss_log = dir.path() / "losses.csv";
  config.checkpoint_every = 1;
  config.checkpoint_path = dir.path() / "b.ckpt";
  const auto wli = small_pool(data::DomainTag::wli, 4, 12);
  const auto nbi = small_pool(data::DomainTag::nbi, 3, 12);
  int calls = 0;
  const auto bundle = train_translation(config, wli, nbi, [&](const EpochLoss& e) {
    ++calls;
    CHECK(std::isfinite(e.cycle));
    CHECK(std::isfinite(e.adversarial_generator));
    CHECK(std::isfinite(e.adversarial_discriminator));
  });
  CHECK(calls == 1);
  CHECK(bundle.epoch == 1);
  std::ifstream log(config.loss_log);
  std::string header, line, extra;
  std::getline(log, header);
  std::getline(log, line);
  CHECK(header == "epoch,L_c,L_d_gen,L_d_disc");
  CHECK(line.rfind("0,", 0) == 0);
  CHECK_FALSE(std::getline(log, extra));
  CHECK(std::filesystem::exists(config.checkpoint_path));
  CHECK_THROWS_AS(train_translation(config, data::DomainDataset{}, nbi), ValidationError);
}

TEST_CASE("training is reproducible from the seed") {
  auto config = tiny_config();
  const auto wli = small_pool(data::DomainTag::wli, 3, 16);
  const auto nbi = small_pool(data::DomainTag::nbi, 3, 16);
  const auto a = train_translation(config, wli, nbi);
  const auto b = train_translation(config, wli, nbi);
  CHECK(serialize_checkpoint(a.to_checkpoint()) == serialize_checkpoint(b.to_checkpoint()));
}

TEST_CASE("bundle checkpoint round trip is byte-identical") {
  testing::TempDir dir("nbi_bundle");
  auto bundle = TranslationBundle::create({2, 4, 8, NormKind::instance}, {1, 4, NormKind::instance}, {1.0, 0.5}, 9, 16);
  bundle.epoch = 7;
  bundle.config_hash = "0123456789abcdef";
  bundle.save(dir.path() / "a.ckpt");
  const auto loaded = TranslationBundle::load(dir.path() / "a.ckpt");
  loaded.save(dir.path() / "b.ckpt");
  std::ifstream fa(dir.path() / "a.ckpt", std::ios::binary), fb(dir.path() / "b.ckpt", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(loaded.epoch == 7);
  CHECK((loaded.weights == LossWeights{1.0, 0.5}));
  CHECK(loaded.generator_spec == bundle.generator_spec);
  const auto same = TranslationBundle::create({2, 4, 8, NormKind::instance}, {1, 4, NormKind::instance}, {}, 9, 16);
  CHECK(unchanged(snapshot(same.generator_parameters()), bundle.generator_parameters()));
}

TEST_CASE("translation keeps metadata and tags the fakes") {
  const auto task = data::make_synthetic_task({16, 2, 2, 0});
  const auto bundle = TranslationBundle::create({2, 4, 8, NormKind::instance}, {1, 4, NormKind::instance}, {}, 1, 32);
  const auto fakes = translate_dataset(bundle, task.x, Direction::wli_to_nbi, {}, 3);
  REQUIRE(fakes.size() == task.x.size());
  CHECK(fakes.tags() == data::TagSet{data::DomainTag::nbi_fake});
  for (std::size_t i = 0; i < fakes.size(); ++i) {
    CHECK(fakes[i].source_id == task.x[i].source_id);
    CHECK(fakes[i].patient_id == task.x[i].patient_id);
    CHECK(fakes[i].label == task.x[i].label);
    CHECK(fakes[i].image().height == 16);
  }
  const auto again = translate_dataset(bundle, task.x, Direction::wli_to_nbi, {}, 1);
  for (std::size_t i = 0; i < fakes.size(); ++i) CHECK(again[i].image() == fakes[i].image());
  CHECK_THROWS_AS(translate_dataset(bundle, task.x, Direction::nbi_to_wli), ValidationError);
  CHECK(translate_dataset(bundle, task.y, Direction::nbi_to_wli).tags() == data::TagSet{data::DomainTag::wli_fake});
}
