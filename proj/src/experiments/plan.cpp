#include "nbi/experiments/plan.hpp"

namespace nbi::experiments {

using data::DomainTag;
using data::TagSet;

std::string_view to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::e1: return "E1";
    case ExperimentId::e2a: return "E2a";
    case ExperimentId::e2b: return "E2b";
    case ExperimentId::e3a: return "E3a";
    case ExperimentId::e3b: return "E3b";
  }
  return "?";
}

std::optional<ExperimentId> parse_experiment_id(std::string_view text) {
  for (auto id : kAllExperiments)
    if (to_string(id) == text) return id;
  return std::nullopt;
}

std::string_view title(ExperimentId id) {
  switch (id) {
    case ExperimentId::e1: return "Baseline for WLI and NBI data";
    case ExperimentId::e2a: return "Accuracies for testing NBI samples";
    case ExperimentId::e2b: return "Accuracies for testing WLI samples";
    case ExperimentId::e3a: return "Converting WLI to NBI for testing";
    case ExperimentId::e3b: return "Converting NBI to WLI for testing";
  }
  return "";
}

std::set<translation::Direction> translations_for(TagSet tags) {
  std::set<translation::Direction> out;
  if (tags.contains(DomainTag::nbi_fake)) out.insert(translation::Direction::wli_to_nbi);
  if (tags.contains(DomainTag::wli_fake)) out.insert(translation::Direction::nbi_to_wli);
  return out;
}

std::set<translation::Direction> ExperimentPlan::required_translations() const {
  std::set<translation::Direction> out;
  for (const auto& row : rows) {
    for (auto d : translations_for(row.train)) out.insert(d);
    for (auto d : translations_for(row.test)) out.insert(d);
  }
  return out;
}

ExperimentPlan build_experiment_plan(ExperimentId id, std::vector<classification::ClassifierSpec> architectures) {
  const TagSet wli{DomainTag::wli}, nbi{DomainTag::nbi};
  const TagSet wli_f{DomainTag::wli_fake}, nbi_f{DomainTag::nbi_fake};
  ExperimentPlan plan;
  plan.id = id;
  plan.architectures = std::move(architectures);
  switch (id) {
    case ExperimentId::e1:
      plan.rows = {{wli, wli}, {nbi, nbi}};
      break;
    case ExperimentId::e2a:
      plan.rows = {{nbi, nbi}, {nbi | wli, nbi}, {nbi | nbi_f, nbi}};
      break;
    case ExperimentId::e2b:
      plan.rows = {{wli, wli}, {nbi | wli, wli}, {wli_f | wli, wli}};
      break;
    case ExperimentId::e3a:
      plan.rows = {{wli, wli}, {wli_f | wli, wli}, {nbi_f, nbi_f}, {nbi | nbi_f, nbi_f}};
      break;
    case ExperimentId::e3b:
      plan.rows = {{nbi, nbi}, {nbi | nbi_f, nbi}, {wli_f, wli_f}, {wli | wli_f, wli_f}};
      break;
  }
  return plan;
}

}  // namespace nbi::experiments
