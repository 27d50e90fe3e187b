#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbi/data/image.hpp"
#include "nbi/experiments/cross_validation.hpp"
#include "nbi/experiments/mcnemar.hpp"

namespace nbi::experiments {

/// Fold accuracies of one (row, architecture).
struct CellSummary {
  std::vector<double> fold_accuracies;
  double mean = 0;
  double std = 0;  ///< sample standard deviation, 0 for a single fold
};

CellSummary summarize(std::vector<double> fold_accuracies);

/// "86.0(4.2)": mean and std in percent, one decimal each.
std::string format_cell(const CellSummary& cell);

struct PairwiseTest {
  classification::Architecture architecture{};
  int row_a = 0;
  int row_b = 0;
  SignificanceResult result;
  double accuracy_a = 0;  ///< pooled over folds
  double accuracy_b = 0;
};

struct RowReport {
  data::TagSet train;
  data::TagSet test;
  /// One entry per architecture of the plan; empty when folds are missing.
  std::vector<std::optional<CellSummary>> cells;
  /// Row is a significant improvement over the first row of the block.
  std::vector<bool> improved;
  std::optional<double> average;  ///< mean over architectures of the cell means
};

struct Report {
  ExperimentId experiment = ExperimentId::e1;
  std::vector<classification::Architecture> architectures;
  std::vector<RowReport> rows;
  std::vector<PairwiseTest> tests;
  std::string config_hash;
  int folds = 0;
  /// Missing (row, architecture, fold) cells by name.
  std::vector<std::string> gaps;

  bool complete() const { return gaps.empty(); }
};

/// Means and stds per cell, the row-average column and every pairwise
/// McNemar test within the block (records pooled over folds, paired by
/// source_id). Throws ValidationError if cells disagree on the config hash.
Report aggregate(const ExperimentPlan& plan, const FoldResults& results, int folds, double alpha = 0.05);

/// Text table in the layout of the published results, `*` after improved cells.
std::string render_text(const Report& report);
/// One line per (row, architecture) with the fold accuracies.
std::string render_csv(const Report& report);
nlohmann::json render_json(const Report& report);

/// Side-by-side real|fake rows on a white background, values in [-1, 1].
data::Image image_grid(const std::vector<std::pair<const data::Image*, const data::Image*>>& pairs, int margin = 4);

}  // namespace nbi::experiments
