#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nbi/cli/run_config.hpp"
#include "nbi/data/folds.hpp"
#include "nbi/experiments/cross_validation.hpp"
#include "nbi/translation/bundle.hpp"

namespace nbi::cli {

/// Resolved configuration plus lazily loaded corpora and the artifact layout
/// under the output directory:
///   run.json                      resolved config and hash
///   gan/shared.ckpt, gan/fold<k>.ckpt  translation bundles (+ .losses.csv)
///   fakes/<tag>/manifest.csv      exported translations
///   classifiers/<name>.ckpt
///   experiments/<id>/             job ledger, prediction files, plan.json
///   report/                       tables and image grids
class Workspace {
 public:
  explicit Workspace(RunConfig config);

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& out() const { return config_.output; }
  /// Hash of the run config combined with the data digest.
  const std::string& hash();

  const experiments::Corpora& corpora();
  const data::PatientFoldPlan& folds();

  /// Hash a bundle must carry; `fold` empty for the shared model.
  std::string gan_hash(std::optional<int> fold);
  std::filesystem::path gan_path(std::optional<int> fold) const;
  /// Throws DependencyError (with the command to run) when the checkpoint is
  /// missing or was produced by another configuration.
  translation::TranslationBundle load_bundle(std::optional<int> fold);
  /// Fakes for cross-validation, translated on demand and cached.
  experiments::FakeProvider fake_provider();
  std::string fake_source();

  void write_run_record();

 private:
  RunConfig config_;
  std::optional<experiments::Corpora> corpora_;
  std::optional<data::PatientFoldPlan> folds_;
  std::string hash_;
};

int cmd_ingest(const std::vector<std::filesystem::path>& manifests, int image_side, std::ostream& out,
               std::ostream& err);
int cmd_synth(const std::filesystem::path& dir, int side, int per_class, int patients, std::uint64_t seed,
              std::ostream& out);
int cmd_gan_train(Workspace& ws, std::ostream& out);
int cmd_translate(Workspace& ws, translation::Direction direction, std::optional<int> fold, std::ostream& out);
int cmd_clf_train(Workspace& ws, data::TagSet train, classification::Architecture arch, std::optional<int> fold,
                  std::ostream& out);
int cmd_experiment(Workspace& ws, experiments::ExperimentId id,
                   const std::vector<classification::Architecture>& archs, std::ostream& out);
/// Renders every experiment found under `dir` (or only `id`). Returns 2 if
/// any cell is missing, after writing the report with explicit gaps.
int cmd_report(const std::filesystem::path& dir, std::optional<experiments::ExperimentId> id, std::ostream& out);

}  // namespace nbi::cli
