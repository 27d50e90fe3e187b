#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nbi/classification/training.hpp"
#include "nbi/data/folds.hpp"
#include "nbi/experiments/plan.hpp"

namespace nbi::experiments {

/// Real corpora of a study.
struct Corpora {
  data::DomainDataset wli;
  data::DomainDataset nbi;
};

/// Returns the translated dataset for a fake tag as seen by `fold`. With one
/// GAN for the whole study the fold is ignored; per-fold GANs must return a
/// translation produced by a model that never saw the fold's patients.
using FakeProvider = std::function<data::DomainDataset(data::DomainTag fake_tag, int fold)>;

/// Provider backed by two precomputed translated datasets (either may be
/// empty if no row needs it).
FakeProvider shared_fakes(data::DomainDataset wli_fake, data::DomainDataset nbi_fake);

struct CellKey {
  ExperimentId experiment = ExperimentId::e1;
  int row = 0;
  classification::Architecture architecture = classification::Architecture::vggf;
  int fold = 0;

  std::string name() const;  ///< e.g. "E2b_r2_vggf_f3"
  auto operator<=>(const CellKey&) const = default;
};

/// Outcome of one (row, architecture, fold) job.
struct CellResult {
  CellKey key;
  data::TagSet train;
  data::TagSet test;
  double accuracy = 0;
  std::size_t train_size = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  /// Identifier of the translation model behind any fake data ("" if none).
  std::string fake_source;
  std::vector<classification::PredictionRecord> records;
};

struct FoldResults {
  ExperimentId experiment = ExperimentId::e1;
  std::vector<CellResult> cells;

  const CellResult* find(const CellKey& key) const;
};

/// One record per completed cell plus the cell's prediction file, so
/// interrupted runs resume and repeated runs with the same configuration
/// hash retrain nothing.
class JobLedger {
 public:
  explicit JobLedger(std::filesystem::path dir);

  /// Completed cell with this key and configuration hash, if any.
  std::optional<CellResult> find(const CellKey& key, const std::string& config_hash) const;
  void record(const CellResult& cell);
  /// Latest entry per key.
  std::vector<CellResult> all() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct CrossValidationOptions {
  classification::ClfTrainConfig classifier;
  /// Hash of everything that determines the cells (config, data, fake source).
  std::string config_hash;
  std::string fake_source;
  JobLedger* ledger = nullptr;
  std::function<void(const CellResult&, bool reused)> on_cell;
};

/// Training / test data of a composition for one fold: patches of patients
/// outside / inside the fold. Fakes carry their source patient, so they follow
/// that patient's fold.
data::DomainDataset compose(data::TagSet tags, const Corpora& corpora, const FakeProvider& fakes, int fold);

/// Classifier seed of a cell; rows share it so paired comparisons start from
/// the same initialization, and it does not depend on which other
/// architectures run alongside.
std::uint64_t cell_seed(std::uint64_t base, const CellKey& key);

/// Trains and evaluates every (fold, row, architecture) cell. Throws
/// LeakageError if a training batch ever contains a test-fold patient.
FoldResults run_cross_validation(const ExperimentPlan& plan, const data::PatientFoldPlan& folds,
                                 const Corpora& corpora, const FakeProvider& fakes,
                                 const CrossValidationOptions& options);

}  // namespace nbi::experiments
