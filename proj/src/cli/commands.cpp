#include "nbi/cli/commands.hpp"

#include <map>
#include <memory>
#include <ostream>
#include <set>

#include "nbi/common/error.hpp"
#include "nbi/common/files.hpp"
#include "nbi/common/hash.hpp"
#include "nbi/data/image_io.hpp"
#include "nbi/data/manifest.hpp"
#include "nbi/data/synthetic.hpp"
#include "nbi/experiments/report.hpp"
#include "nbi/translation/trainer.hpp"
#include "nbi/translation/translate.hpp"

namespace nbi::cli {

namespace fs = std::filesystem;
using data::DomainTag;
using experiments::ExperimentId;

namespace {

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = kDigits[v & 0xF];
  return s;
}

// Order-sensitive digest of metadata and pixels.
std::string data_digest(const experiments::Corpora& c) {
  std::uint64_t h = 0;
  auto mix = [&h](std::string_view bytes) { h = fnv1a64(hex64(h) + std::to_string(fnv1a64(bytes))); };
  for (const auto* ds : {&c.wli, &c.nbi}) {
    mix("dataset");
    for (const auto& p : ds->patches()) {
      mix(p.source_id + '|' + p.patient_id + '|' + std::string(data::to_string(p.label)) + '|' +
          std::string(data::to_string(p.tag())));
      const auto& v = p.image().values;
      mix({reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float)});
    }
  }
  return hex64(h);
}

std::string counts_line(const data::DomainDataset& ds, std::string_view name) {
  const auto& c = ds.counts();
  return std::string(name) + ": " + std::to_string(c.total()) + " (" + std::to_string(c.healthy) + "/" +
         std::to_string(c.celiac) + ")";
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ValidationError(what + " is not set in the config");
}

std::string fold_suffix(std::optional<int> fold) { return fold ? "_f" + std::to_string(*fold) : ""; }

}  // namespace

Workspace::Workspace(RunConfig config) : config_(std::move(config)) {}

const experiments::Corpora& Workspace::corpora() {
  if (!corpora_) {
    require_file(config_.data.wli_manifest, "data.wli_manifest");
    require_file(config_.data.nbi_manifest, "data.nbi_manifest");
    const data::ManifestOptions opts{config_.data.image_side};
    auto wli = data::load_manifest(config_.data.wli_manifest, opts);
    auto nbi = data::load_manifest(config_.data.nbi_manifest, opts);
    if (!wli.empty() && wli.tags() != data::TagSet{DomainTag::wli})
      throw ValidationError(config_.data.wli_manifest.string() + " does not hold real WLI patches");
    if (!nbi.empty() && nbi.tags() != data::TagSet{DomainTag::nbi})
      throw ValidationError(config_.data.nbi_manifest.string() + " does not hold real NBI patches");
    corpora_ = experiments::Corpora{std::move(wli), std::move(nbi)};
  }
  return *corpora_;
}

const std::string& Workspace::hash() {
  if (hash_.empty()) hash_ = config_hash({{"run", run_hash(config_)}, {"data", data_digest(corpora())}});
  return hash_;
}

const data::PatientFoldPlan& Workspace::folds() {
  if (!folds_) {
    const auto& c = corpora();
    folds_ = data::assign_folds(std::vector<const data::DomainDataset*>{&c.wli, &c.nbi}, config_.experiment.folds,
                                config_.seed);
  }
  return *folds_;
}

std::string Workspace::gan_hash(std::optional<int> fold) {
  return config_hash({{"run", hash()}, {"scope", fold ? "fold" + std::to_string(*fold) : "shared"}});
}

fs::path Workspace::gan_path(std::optional<int> fold) const {
  return out() / "gan" / (fold ? "fold" + std::to_string(*fold) + ".ckpt" : std::string("shared.ckpt"));
}

translation::TranslationBundle Workspace::load_bundle(std::optional<int> fold) {
  const auto path = gan_path(fold);
  const std::string hint = "run `nbi gan-train --config <config>" +
                           std::string(config_.experiment.per_fold_gan ? " --per-fold-gan" : "") + "` first";
  if (!fs::exists(path)) throw DependencyError("no translation checkpoint at " + path.string() + "; " + hint);
  auto bundle = translation::TranslationBundle::load(path);
  if (bundle.config_hash != gan_hash(fold))
    throw DependencyError(path.string() + " was trained under config " + bundle.config_hash + ", expected " +
                          gan_hash(fold) + "; " + hint);
  if (bundle.epoch != config_.gan.epochs)
    throw DependencyError(path.string() + " is a partial checkpoint (epoch " + std::to_string(bundle.epoch) + " of " +
                          std::to_string(config_.gan.epochs) + "); " + hint);
  return bundle;
}

std::string Workspace::fake_source() {
  if (!config_.experiment.per_fold_gan) return gan_hash(std::nullopt);
  nlohmann::json all = nlohmann::json::array();
  for (int f = 0; f < config_.experiment.folds; ++f) all.push_back(gan_hash(f));
  return "per-fold:" + config_hash(all);
}

experiments::FakeProvider Workspace::fake_provider() {
  struct Cache {
    std::map<std::pair<DomainTag, int>, data::DomainDataset> fakes;
    std::map<int, translation::TranslationBundle> bundles;
  };
  auto cache = std::make_shared<Cache>();
  const bool per_fold = config_.experiment.per_fold_gan;
  return [this, cache, per_fold](DomainTag tag, int fold) {
    const int scope = per_fold ? fold : -1;
    const auto key = std::make_pair(tag, scope);
    if (auto it = cache->fakes.find(key); it != cache->fakes.end()) return it->second;
    auto b = cache->bundles.find(scope);
    if (b == cache->bundles.end())
      b = cache->bundles.emplace(scope, load_bundle(per_fold ? std::optional<int>(fold) : std::nullopt)).first;
    const auto direction =
        tag == DomainTag::nbi_fake ? translation::Direction::wli_to_nbi : translation::Direction::nbi_to_wli;
    const auto& source = direction == translation::Direction::wli_to_nbi ? corpora().wli : corpora().nbi;
    auto fakes = translation::translate_dataset(b->second, source, direction, config_.gan.pad, config_.translate_batch);
    return cache->fakes.emplace(key, std::move(fakes)).first->second;
  };
}

void Workspace::write_run_record() {
  fs::create_directories(out());
  write_text_atomic(out() / "run.json",
                    nlohmann::json{{"config", to_json(config_)}, {"config_hash", hash()}}.dump(2) + "\n");
}

int cmd_ingest(const std::vector<fs::path>& manifests, int image_side, std::ostream& out, std::ostream& err) {
  if (manifests.empty()) throw ValidationError("ingest needs at least one manifest");
  std::map<DomainTag, data::LabelCounts> totals;
  for (const auto& m : manifests) {
    const auto ds = data::load_manifest(m, {image_side});
    if (ds.empty()) {
      err << "warning: " << m.string() << " lists no patches\n";
      continue;
    }
    for (auto tag : data::kAllTags)
      if (ds.tags().contains(tag)) {
        totals[tag].healthy += ds.counts().healthy;
        totals[tag].celiac += ds.counts().celiac;
      }
  }
  std::string line;
  for (auto tag : {DomainTag::wli, DomainTag::nbi, DomainTag::wli_fake, DomainTag::nbi_fake}) {
    const auto it = totals.find(tag);
    if (it == totals.end() && (tag == DomainTag::wli_fake || tag == DomainTag::nbi_fake)) continue;
    const data::LabelCounts c = it == totals.end() ? data::LabelCounts{} : it->second;
    if (!line.empty()) line += ", ";
    line += std::string(data::to_string(tag)) + ": " + std::to_string(c.total()) + " (" + std::to_string(c.healthy) +
            "/" + std::to_string(c.celiac) + ")";
  }
  out << line << "\n";
  return 0;
}

int cmd_synth(const fs::path& dir, int side, int per_class, int patients, std::uint64_t seed, std::ostream& out) {
  const auto task = data::make_synthetic_task({side, per_class, patients, seed});
  const std::string note = "synthetic seed=" + std::to_string(seed);
  data::write_manifest(dir / "wli" / "manifest.csv", task.x, "images", note);
  data::write_manifest(dir / "nbi" / "manifest.csv", task.y, "images", note);
  out << counts_line(task.x, "WLI") << ", " << counts_line(task.y, "NBI") << "\n";
  out << "manifests in " << (dir / "wli").string() << " and " << (dir / "nbi").string() << "\n";
  return 0;
}

int cmd_gan_train(Workspace& ws, std::ostream& out) {
  fs::create_directories(ws.out());
  DirectoryLock lock(ws.out());
  ws.write_run_record();
  const auto& c = ws.corpora();
  std::vector<std::optional<int>> scopes;
  if (ws.config().experiment.per_fold_gan)
    for (int f = 0; f < ws.config().experiment.folds; ++f) scopes.push_back(f);
  else
    scopes.push_back(std::nullopt);

  for (const auto& scope : scopes) {
    const auto path = ws.gan_path(scope);
    const auto expected = ws.gan_hash(scope);
    if (fs::exists(path)) {
      const auto meta = read_checkpoint_meta(path);
      if (meta.value("config_hash", "") == expected && meta.value("epoch", -1) == ws.config().gan.epochs) {
        out << path.string() << " is up to date (" << expected << ")\n";
        continue;
      }
    }
    data::DomainDataset wli = c.wli, nbi = c.nbi;
    if (scope) {
      wli = ws.folds().training_part(wli, *scope);
      nbi = ws.folds().training_part(nbi, *scope);
    }
    auto config = ws.config().gan;
    config.loss_log = fs::path(path).replace_extension(".losses.csv");
    fs::remove(config.loss_log);
    fs::create_directories(path.parent_path());
    out << "training translation model " << path.filename().string() << " on " << wli.size() << " WLI / "
        << nbi.size() << " NBI patches, " << config.epochs << " epochs\n";
    // Periodic checkpoints go to a side file so an interrupted run never
    // leaves a partial model where a finished one is expected.
    config.checkpoint_path = fs::path(path).replace_extension(".partial.ckpt");
    auto bundle = translation::train_translation(config, wli, nbi, [&](const translation::EpochLoss& e) {
      if ((e.epoch + 1) % 10 == 0 || e.epoch + 1 == config.epochs)
        out << "  epoch " << e.epoch + 1 << "  L_c " << e.cycle << "  L_d(G) " << e.adversarial_generator
            << "  L_d(D) " << e.adversarial_discriminator << std::endl;
    });
    bundle.config_hash = expected;
    bundle.save(path);
    fs::remove(config.checkpoint_path);
    out << "saved " << path.string() << "\n";
  }
  return 0;
}

int cmd_translate(Workspace& ws, translation::Direction direction, std::optional<int> fold, std::ostream& out) {
  if (fold && !ws.config().experiment.per_fold_gan)
    throw ValidationError("--fold needs per-fold translation models (--per-fold-gan)");
  if (!fold && ws.config().experiment.per_fold_gan)
    throw ValidationError("per-fold translation models need --fold");
  const auto bundle = ws.load_bundle(fold);
  const auto& c = ws.corpora();
  const auto& source = direction == translation::Direction::wli_to_nbi ? c.wli : c.nbi;
  const auto fakes = translation::translate_dataset(bundle, source, direction, ws.config().gan.pad,
                                                    ws.config().translate_batch);
  const auto tag = translation::target_tag(direction);
  fs::create_directories(ws.out());
  DirectoryLock lock(ws.out());
  const auto path = ws.out() / "fakes" / (std::string(data::to_string(tag)) + fold_suffix(fold)) / "manifest.csv";
  data::write_manifest(path, fakes, "images", "config_hash=" + bundle.config_hash);
  out << counts_line(fakes, data::to_string(tag)) << " -> " << path.string() << "\n";
  return 0;
}

int cmd_clf_train(Workspace& ws, data::TagSet train, classification::Architecture arch, std::optional<int> fold,
                  std::ostream& out) {
  if (train.size() == 0) throw ValidationError("empty training composition");
  if (fold && (*fold < 0 || *fold >= ws.config().experiment.folds))
    throw ValidationError("--fold out of range");
  const auto spec = classification::ClassifierSpec::make(arch, ws.config().scale);
  std::string name = std::string(classification::to_string(arch)) + "_";
  for (auto tag : data::kAllTags)
    if (train.contains(tag)) name += std::string(data::to_string(tag)) + "+";
  name.pop_back();
  name += fold_suffix(fold);
  const auto path = ws.out() / "classifiers" / (name + ".ckpt");
  const auto hash = config_hash({{"run", ws.hash()},
                                 {"train", data::to_string(train)},
                                 {"spec", classification::to_json(spec)},
                                 {"fold", fold ? *fold : -1}});
  if (fs::exists(path) && read_checkpoint_meta(path).value("config_hash", "") == hash) {
    out << path.string() << " is up to date (" << hash << ")\n";
    return 0;
  }
  const auto fakes = experiments::translations_for(train).empty() ? experiments::FakeProvider{} : ws.fake_provider();
  auto set = experiments::compose(train, ws.corpora(), fakes, fold.value_or(0));
  if (fold) set = ws.folds().training_part(set, *fold);
  auto config = ws.config().classifier;
  config.seed = experiments::cell_seed(config.seed, {ExperimentId::e1, 0, arch, fold.value_or(0)});
  out << "training " << name << " on " << set.size() << " patches\n";
  const auto trained = classification::train_classifier(config, spec, set);
  fs::create_directories(path.parent_path());
  DirectoryLock lock(ws.out());
  save_checkpoint(path, classification::classifier_checkpoint(
                            trained.model, {{"config_hash", hash},
                                            {"train", data::to_string(train)},
                                            {"fold", fold ? *fold : -1},
                                            {"final_loss", trained.losses.empty() ? 0.0 : trained.losses.back()}}));
  out << "saved " << path.string() << " (final loss " << (trained.losses.empty() ? 0.0 : trained.losses.back())
      << ")\n";
  return 0;
}

namespace {

struct PlanRecord {
  std::vector<classification::Architecture> architectures;
  int folds = 0;
  std::string config_hash;
};

PlanRecord read_plan_record(const fs::path& dir) {
  PlanRecord r;
  const auto path = dir / "plan.json";
  if (!fs::exists(path)) return r;
  const auto j = nlohmann::json::parse(read_text(path));
  for (const auto& a : j.at("architectures")) r.architectures.push_back(*classification::parse_architecture(a.get<std::string>()));
  r.folds = j.at("folds");
  r.config_hash = j.value("config_hash", "");
  return r;
}

void write_plan_record(const fs::path& dir, const PlanRecord& r, classification::Scale scale) {
  nlohmann::json archs = nlohmann::json::array();
  for (auto a : r.architectures) archs.push_back(classification::to_string(a));
  write_text_atomic(dir / "plan.json", nlohmann::json{{"architectures", archs},
                                                      {"folds", r.folds},
                                                      {"scale", classification::to_string(scale)},
                                                      {"config_hash", r.config_hash}}
                                               .dump(2) + "\n");
}

// Table column order.
std::vector<classification::Architecture> ordered(const std::set<classification::Architecture>& archs) {
  std::vector<classification::Architecture> out;
  for (auto a : {classification::Architecture::vggf, classification::Architecture::alexnet,
                 classification::Architecture::vgg16})
    if (archs.count(a)) out.push_back(a);
  return out;
}

}  // namespace

int cmd_experiment(Workspace& ws, ExperimentId id, const std::vector<classification::Architecture>& archs,
                   std::ostream& out) {
  fs::create_directories(ws.out());
  DirectoryLock lock(ws.out());
  ws.write_run_record();
  const auto plan = experiments::build_experiment_plan(id, ws.config().specs(archs));
  const bool needs_fakes = !plan.required_translations().empty();
  const auto dir = ws.out() / "experiments" / std::string(experiments::to_string(id));
  experiments::JobLedger ledger(dir);

  auto record = read_plan_record(dir);
  std::set<classification::Architecture> all(archs.begin(), archs.end());
  if (record.config_hash == ws.hash()) all.insert(record.architectures.begin(), record.architectures.end());
  write_plan_record(dir, {ordered(all), ws.config().experiment.folds, ws.hash()}, ws.config().scale);

  if (needs_fakes) {
    // Fail before any training when a translation model is missing.
    if (ws.config().experiment.per_fold_gan)
      for (int f = 0; f < ws.config().experiment.folds; ++f) ws.load_bundle(f);
    else
      ws.load_bundle(std::nullopt);
  }

  experiments::CrossValidationOptions options;
  options.classifier = ws.config().classifier;
  options.config_hash = ws.hash();
  options.fake_source = needs_fakes ? ws.fake_source() : "";
  options.ledger = &ledger;
  std::size_t trained = 0, reused = 0;
  options.on_cell = [&](const experiments::CellResult& cell, bool was_reused) {
    ++(was_reused ? reused : trained);
    out << (was_reused ? "  cached  " : "  trained ") << cell.key.name() << "  acc " << cell.accuracy << "\n";
  };
  out << experiments::title(id) << ": " << plan.rows.size() << " rows x " << archs.size() << " architectures x "
      << ws.config().experiment.folds << " folds\n";
  const auto results = experiments::run_cross_validation(plan, ws.folds(), ws.corpora(),
                                                         needs_fakes ? ws.fake_provider() : experiments::FakeProvider{},
                                                         options);
  const auto report = experiments::aggregate(plan, results, ws.config().experiment.folds);
  out << experiments::render_text(report);
  out << trained << " cells trained, " << reused << " reused\n";
  return 0;
}

namespace {

void write_grids(const fs::path& dir, const fs::path& report_dir, std::ostream& out) {
  const auto run = dir / "run.json";
  if (!fs::exists(run)) return;
  auto config = run_config_from_json(nlohmann::json::parse(read_text(run)).at("config"));
  config.output = dir;
  Workspace ws(std::move(config));
  std::optional<translation::TranslationBundle> bundle;
  try {
    bundle = ws.load_bundle(ws.config().experiment.per_fold_gan ? std::optional<int>(0) : std::nullopt);
  } catch (const DependencyError&) {
    out << "no translation model, skipping image grids\n";
    return;
  }
  constexpr std::size_t kExamples = 4;
  for (auto direction : {translation::Direction::wli_to_nbi, translation::Direction::nbi_to_wli}) {
    const auto& all = direction == translation::Direction::wli_to_nbi ? ws.corpora().wli : ws.corpora().nbi;
    std::vector<data::ImagePatch> picked;
    // Alternate labels so both classes appear.
    for (auto label : {data::Label::healthy, data::Label::celiac}) {
      std::size_t n = 0;
      for (const auto& p : all.patches())
        if (p.label == label && n < kExamples / 2) {
          picked.push_back(p);
          ++n;
        }
    }
    if (picked.empty()) continue;
    const data::DomainDataset sample(translation::source_tag(direction), picked);
    const auto fakes = translation::translate_dataset(*bundle, sample, direction, ws.config().gan.pad);
    std::vector<std::pair<const data::Image*, const data::Image*>> pairs;
    for (std::size_t i = 0; i < sample.size(); ++i) pairs.emplace_back(&sample[i].image(), &fakes[i].image());
    const auto name = std::string("grid_") + std::string(data::to_string(translation::source_tag(direction))) +
                      "_to_" + std::string(data::to_string(translation::target_tag(direction))) + ".png";
    data::write_image(report_dir / name, experiments::image_grid(pairs));
    out << "wrote " << (report_dir / name).string() << "\n";
  }
}

}  // namespace

int cmd_report(const fs::path& dir, std::optional<ExperimentId> only, std::ostream& out) {
  if (!fs::exists(dir / "experiments"))
    throw DependencyError("no experiments under " + dir.string() + "; run `nbi experiment` first");
  DirectoryLock lock(dir);
  const auto report_dir = dir / "report";
  fs::create_directories(report_dir);
  bool complete = true;
  bool any = false;
  nlohmann::json combined = nlohmann::json::array();
  for (auto id : experiments::kAllExperiments) {
    if (only && *only != id) continue;
    const auto exp_dir = dir / "experiments" / std::string(experiments::to_string(id));
    if (!fs::exists(exp_dir / "plan.json")) {
      if (only) throw DependencyError("experiment " + std::string(experiments::to_string(id)) + " has not been run");
      continue;
    }
    any = true;
    const auto record = read_plan_record(exp_dir);
    std::vector<classification::ClassifierSpec> specs;
    for (auto a : record.architectures) specs.push_back(classification::ClassifierSpec::make(a));
    const auto plan = experiments::build_experiment_plan(id, specs);
    experiments::FoldResults results;
    results.experiment = id;
    results.cells = experiments::JobLedger(exp_dir).all();
    const auto report = experiments::aggregate(plan, results, record.folds);
    if (!report.config_hash.empty() && report.config_hash != record.config_hash)
      throw ValidationError(std::string(experiments::to_string(id)) + ": cells were produced by config " +
                            report.config_hash + " but the plan was last run with " + record.config_hash);
    const std::string stem = std::string(experiments::to_string(id));
    const auto text = experiments::render_text(report);
    write_text_atomic(report_dir / (stem + ".txt"), text);
    write_text_atomic(report_dir / (stem + ".csv"), experiments::render_csv(report));
    const auto j = experiments::render_json(report);
    write_text_atomic(report_dir / (stem + ".json"), j.dump(2) + "\n");
    combined.push_back(j);
    out << text << "\n";
    if (!report.complete()) {
      complete = false;
      out << "gaps: ";
      for (const auto& g : report.gaps) out << g << ' ';
      out << "\n";
    }
  }
  if (!any) throw DependencyError("no experiments under " + dir.string() + "; run `nbi experiment` first");
  write_text_atomic(report_dir / "report.json", combined.dump(2) + "\n");
  write_grids(dir, report_dir, out);
  return complete ? 0 : 2;
}

}  // namespace nbi::cli
