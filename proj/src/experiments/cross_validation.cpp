#include "nbi/experiments/cross_validation.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "nbi/common/error.hpp"
#include "nbi/common/files.hpp"

namespace nbi::experiments {

using data::DomainTag;

FakeProvider shared_fakes(data::DomainDataset wli_fake, data::DomainDataset nbi_fake) {
  return [wli_fake = std::move(wli_fake), nbi_fake = std::move(nbi_fake)](DomainTag tag, int) {
    if (tag == DomainTag::wli_fake) return wli_fake;
    if (tag == DomainTag::nbi_fake) return nbi_fake;
    throw InternalError("fake provider asked for a real tag");
  };
}

std::string CellKey::name() const {
  return std::string(to_string(experiment)) + "_r" + std::to_string(row) + "_" +
         std::string(classification::to_string(architecture)) + "_f" + std::to_string(fold);
}

const CellResult* FoldResults::find(const CellKey& key) const {
  for (const auto& c : cells)
    if (c.key == key) return &c;
  return nullptr;
}

JobLedger::JobLedger(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "cells");
}

namespace {

nlohmann::json cell_json(const CellResult& c) {
  return {{"experiment", to_string(c.key.experiment)},
          {"row", c.key.row},
          {"architecture", classification::to_string(c.key.architecture)},
          {"fold", c.key.fold},
          {"train", data::to_string(c.train)},
          {"test", data::to_string(c.test)},
          {"accuracy", c.accuracy},
          {"train_size", c.train_size},
          {"test_size", c.records.size()},
          {"config_hash", c.config_hash},
          {"seed", c.seed},
          {"fake_source", c.fake_source},
          {"records", "cells/" + c.key.name() + ".csv"}};
}

CellResult cell_from_json(const nlohmann::json& j, const std::filesystem::path& dir) {
  CellResult c;
  const auto exp = parse_experiment_id(j.at("experiment").get<std::string>());
  const auto arch = classification::parse_architecture(j.at("architecture").get<std::string>());
  const auto train = data::parse_tag_set(j.at("train").get<std::string>());
  const auto test = data::parse_tag_set(j.at("test").get<std::string>());
  if (!exp || !arch || !train || !test) throw ParseError("job ledger: malformed entry " + j.dump());
  c.key = {*exp, j.at("row"), *arch, j.at("fold")};
  c.train = *train;
  c.test = *test;
  c.accuracy = j.at("accuracy");
  c.train_size = j.at("train_size");
  c.config_hash = j.at("config_hash");
  c.seed = j.at("seed");
  c.fake_source = j.at("fake_source");
  c.records = classification::parse_records(read_text(dir / j.at("records").get<std::string>()));
  return c;
}

}  // namespace

std::vector<CellResult> JobLedger::all() const {
  std::map<CellKey, nlohmann::json> latest;
  std::ifstream in(dir_ / "ledger.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw ParseError("job ledger: unreadable line in " + (dir_ / "ledger.jsonl").string());
    }
    const auto c = cell_from_json(j, dir_);
    latest[c.key] = j;
  }
  std::vector<CellResult> out;
  for (const auto& [_, j] : latest) out.push_back(cell_from_json(j, dir_));
  return out;
}

std::optional<CellResult> JobLedger::find(const CellKey& key, const std::string& config_hash) const {
  std::optional<CellResult> hit;
  std::ifstream in(dir_ / "ledger.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    if (j.value("experiment", "") != to_string(key.experiment) || j.value("row", -1) != key.row ||
        j.value("architecture", "") != classification::to_string(key.architecture) || j.value("fold", -1) != key.fold)
      continue;
    if (j.value("config_hash", "") == config_hash && std::filesystem::exists(dir_ / j.value("records", "")))
      hit = cell_from_json(j, dir_);
    else
      hit.reset();
  }
  return hit;
}

void JobLedger::record(const CellResult& cell) {
  write_text_atomic(dir_ / "cells" / (cell.key.name() + ".csv"), classification::format_records(cell.records));
  std::ofstream out(dir_ / "ledger.jsonl", std::ios::app);
  if (!out) throw IoError("cannot append to job ledger in " + dir_.string());
  out << cell_json(cell).dump() << '\n';
}

data::DomainDataset compose(data::TagSet tags, const Corpora& corpora, const FakeProvider& fakes, int fold) {
  data::DomainDataset out;
  bool first = true;
  for (auto tag : data::kAllTags) {
    if (!tags.contains(tag)) continue;
    data::DomainDataset part;
    switch (tag) {
      case DomainTag::wli: part = corpora.wli; break;
      case DomainTag::nbi: part = corpora.nbi; break;
      default:
        if (!fakes) throw DependencyError(std::string(data::to_string(tag)) + " requested but no translation model");
        part = fakes(tag, fold);
        if (part.empty()) throw DependencyError(std::string(data::to_string(tag)) + " dataset is missing");
    }
    out = first ? part : data::merge_datasets(out, part);
    first = false;
  }
  return out;
}

std::uint64_t cell_seed(std::uint64_t base, const CellKey& key) {
  return base + 1000ULL * static_cast<std::uint64_t>(key.fold) + static_cast<std::uint64_t>(key.architecture);
}

FoldResults run_cross_validation(const ExperimentPlan& plan, const data::PatientFoldPlan& folds,
                                 const Corpora& corpora, const FakeProvider& fakes,
                                 const CrossValidationOptions& options) {
  for (const auto* ds : {&corpora.wli, &corpora.nbi})
    for (const auto& p : ds->patches())
      if (!folds.covers(p.patient_id))
        throw ValidationError("fold plan does not cover patient '" + p.patient_id + "'");

  FoldResults results;
  results.experiment = plan.id;
  for (int fold = 0; fold < folds.k(); ++fold) {
    const auto held_out = folds.patients_in(fold);
    const std::set<std::string> test_patients(held_out.begin(), held_out.end());

    for (std::size_t r = 0; r < plan.rows.size(); ++r) {
      const auto& row = plan.rows[r];
      for (const auto& spec : plan.architectures) {
        const CellKey key{plan.id, static_cast<int>(r), spec.architecture, fold};

        if (options.ledger) {
          if (auto done = options.ledger->find(key, options.config_hash)) {
            if (options.on_cell) options.on_cell(*done, true);
            results.cells.push_back(std::move(*done));
            continue;
          }
        }

        const auto train = folds.training_part(compose(row.train, corpora, fakes, fold), fold);
        const auto test = folds.test_part(compose(row.test, corpora, fakes, fold), fold);
        for (const auto& p : train.patches())
          if (test_patients.count(p.patient_id))
            throw LeakageError(key.name() + ": training composition contains test patient '" + p.patient_id + "'");

        auto config = options.classifier;
        config.seed = cell_seed(options.classifier.seed, key);
        auto audit = [&](std::int64_t it, const std::vector<const data::ImagePatch*>& batch) {
          for (const auto* p : batch)
            if (test_patients.count(p->patient_id))
              throw LeakageError(key.name() + ": batch " + std::to_string(it) + " contains test patient '" +
                                 p->patient_id + "' (" + p->source_id + ")");
        };
        auto trained = classification::train_classifier(config, spec, train, audit);
        auto eval = classification::evaluate(trained.model, test);
        for (const auto& rec : eval.records)
          if (!test_patients.count(rec.patient_id))
            throw InternalError(key.name() + ": test record from a training patient");

        CellResult cell;
        cell.key = key;
        cell.train = row.train;
        cell.test = row.test;
        cell.accuracy = eval.accuracy;
        cell.train_size = train.size();
        cell.config_hash = options.config_hash;
        cell.seed = config.seed;
        cell.fake_source = (translations_for(row.train).empty() && translations_for(row.test).empty())
                               ? std::string()
                               : options.fake_source;
        cell.records = std::move(eval.records);
        if (options.ledger) options.ledger->record(cell);
        if (options.on_cell) options.on_cell(cell, false);
        results.cells.push_back(std::move(cell));
      }
    }
  }
  return results;
}

}  // namespace nbi::experiments
