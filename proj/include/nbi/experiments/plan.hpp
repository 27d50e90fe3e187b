#pragma once

#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "nbi/classification/classifier.hpp"
#include "nbi/data/types.hpp"
#include "nbi/translation/translate.hpp"

namespace nbi::experiments {

enum class ExperimentId { e1, e2a, e2b, e3a, e3b };

inline constexpr ExperimentId kAllExperiments[] = {ExperimentId::e1, ExperimentId::e2a, ExperimentId::e2b,
                                                   ExperimentId::e3a, ExperimentId::e3b};

std::string_view to_string(ExperimentId id);
std::optional<ExperimentId> parse_experiment_id(std::string_view text);
std::string_view title(ExperimentId id);

struct ExperimentRow {
  data::TagSet train;
  data::TagSet test;
  bool operator==(const ExperimentRow&) const = default;
};

struct ExperimentPlan {
  ExperimentId id = ExperimentId::e1;
  std::vector<ExperimentRow> rows;
  std::vector<classification::ClassifierSpec> architectures;

  /// Translation directions needed to materialize the fake tags used by any row.
  std::set<translation::Direction> required_translations() const;
};

/// Train/test compositions of one experiment:
///   E1  WLI->WLI, NBI->NBI
///   E2a NBI, NBI+WLI, NBI+NBI_f        -> NBI
///   E2b WLI, NBI+WLI, WLI_f+WLI        -> WLI
///   E3a WLI->WLI, WLI_f+WLI->WLI, NBI_f->NBI_f, NBI+NBI_f->NBI_f
///   E3b NBI->NBI, NBI+NBI_f->NBI, WLI_f->WLI_f, WLI+WLI_f->WLI_f
ExperimentPlan build_experiment_plan(ExperimentId id, std::vector<classification::ClassifierSpec> architectures);

/// Fake tags contained in a composition.
std::set<translation::Direction> translations_for(data::TagSet tags);

}  // namespace nbi::experiments
