#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

#include "nbi/classification/classifier.hpp"
#include "nbi/data/dataset.hpp"

namespace nbi::classification {

struct ClfTrainConfig {
  double weight_decay = 0.0005;
  double momentum = 0.9;
  int batch_size = 128;
  int iterations = 5000;
  double base_lr = 0.01;
  /// Fractions of the budget at which the rate drops by lr_gamma.
  std::vector<double> lr_milestones = {0.6, 0.85};
  double lr_gamma = 0.1;
  /// Random crop + dihedral transform per sampled patch.
  bool augment = true;
  /// Rescale the gradient to this L2 norm before each step when it is larger; 0 turns it off.
  double max_grad_norm = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const ClfTrainConfig& config);
ClfTrainConfig clf_config_from_json(const nlohmann::json& j);

/// Step-decayed learning rate at `iteration`.
double learning_rate_at(std::int64_t iteration, const ClfTrainConfig& config);

struct Batch {
  torch::Tensor inputs;
  torch::Tensor targets;  ///< int64 class indices
};

using BatchSource = std::function<Batch(std::int64_t iteration)>;
using Forward = std::function<torch::Tensor(const torch::Tensor&)>;

/// SGD with momentum and L2 weight decay on the softmax log-loss:
/// buf <- momentum * buf + (grad + weight_decay * param); param <- param - lr * buf.
/// With max_grad_norm > 0 the loss gradient is clipped to that norm first.
/// Returns the per-iteration loss. Throws NumericalError on a non-finite loss.
std::vector<double> run_sgd(torch::nn::Module& model, const Forward& forward, const BatchSource& batches,
                            const ClfTrainConfig& config);

/// Sees every training batch before the step (for leakage audits).
using BatchObserver = std::function<void(std::int64_t iteration, const std::vector<const data::ImagePatch*>& batch)>;

struct TrainedClassifier {
  Classifier model{nullptr};
  std::vector<double> losses;
};

/// Samples batch_size patches uniformly with replacement per iteration,
/// augments them and runs SGD from a fresh initialization seeded by
/// config.seed. Throws ValidationError if the set is empty, holds a single
/// label, or patches are smaller than the crop.
TrainedClassifier train_classifier(const ClfTrainConfig& config, const ClassifierSpec& spec,
                                   const data::DomainDataset& train_set, const BatchObserver& observer = {});

struct PredictionRecord {
  std::string source_id;
  std::string patient_id;
  data::Label truth = data::Label::healthy;
  data::Label predicted = data::Label::healthy;
  /// Probability of the predicted label.
  double probability = 0;

  bool correct() const { return truth == predicted; }
  bool operator==(const PredictionRecord&) const = default;
};

struct Evaluation {
  std::vector<PredictionRecord> records;
  double accuracy = 0;
};

/// Deterministic inference on center crops. Throws ValidationError on an
/// empty test set.
Evaluation evaluate(Classifier& classifier, const data::DomainDataset& test_set, int batch_size = 64);

double accuracy_of(const std::vector<PredictionRecord>& records);

/// `source_id,true,pred,prob` plus a trailing patient_id column, with a
/// header line. parse_records also reads the four-column form.
std::string format_records(const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> parse_records(const std::string& text);

}  // namespace nbi::classification
