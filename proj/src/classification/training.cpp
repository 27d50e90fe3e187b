#include "nbi/classification/training.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "nbi/common/error.hpp"
#include "nbi/common/rng.hpp"
#include "nbi/data/augment.hpp"
#include "nbi/data/tensor_convert.hpp"

namespace nbi::classification {

void ClfTrainConfig::validate() const {
  if (weight_decay < 0) throw ValidationError("classifier.weight_decay must be >= 0");
  if (momentum < 0 || momentum >= 1) throw ValidationError("classifier.momentum must be in [0, 1)");
  if (batch_size < 1) throw ValidationError("classifier.batch_size must be >= 1");
  if (iterations < 0) throw ValidationError("classifier.iterations must be >= 0");
  if (base_lr < 0) throw ValidationError("classifier.base_lr must be >= 0");
  if (!(max_grad_norm >= 0)) throw ValidationError("classifier.max_grad_norm must be >= 0");
  for (double m : lr_milestones)
    if (m < 0 || m > 1) throw ValidationError("classifier.lr_milestones must lie in [0, 1]");
}

nlohmann::json to_json(const ClfTrainConfig& c) {
  return {{"weight_decay", c.weight_decay}, {"momentum", c.momentum},         {"batch_size", c.batch_size},
          {"iterations", c.iterations},     {"base_lr", c.base_lr},           {"lr_milestones", c.lr_milestones},
          {"lr_gamma", c.lr_gamma},         {"augment", c.augment},           {"max_grad_norm", c.max_grad_norm},
          {"seed", c.seed}};
}

ClfTrainConfig clf_config_from_json(const nlohmann::json& j) {
  ClfTrainConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "weight_decay") c.weight_decay = value;
    else if (key == "momentum") c.momentum = value;
    else if (key == "batch_size") c.batch_size = value;
    else if (key == "iterations") c.iterations = value;
    else if (key == "base_lr") c.base_lr = value;
    else if (key == "lr_milestones") c.lr_milestones = value.get<std::vector<double>>();
    else if (key == "lr_gamma") c.lr_gamma = value;
    else if (key == "augment") c.augment = value;
    else if (key == "max_grad_norm") c.max_grad_norm = value;
    else if (key == "seed") c.seed = value;
    else throw ValidationError("unknown key classifier." + key);
  }
  return c;
}

double learning_rate_at(std::int64_t iteration, const ClfTrainConfig& config) {
  double lr = config.base_lr;
  for (double m : config.lr_milestones)
    if (static_cast<double>(iteration) >= m * config.iterations) lr *= config.lr_gamma;
  return lr;
}

std::vector<double> run_sgd(torch::nn::Module& model, const Forward& forward, const BatchSource& batches,
                            const ClfTrainConfig& config) {
  config.validate();
  torch::optim::SGD opt(model.parameters(), torch::optim::SGDOptions(config.base_lr)
                                                .momentum(config.momentum)
                                                .weight_decay(config.weight_decay));
  model.train();
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(config.iterations));
  for (std::int64_t it = 0; it < config.iterations; ++it) {
    for (auto& group : opt.param_groups())
      static_cast<torch::optim::SGDOptions&>(group.options()).lr(learning_rate_at(it, config));
    const auto batch = batches(it);
    const auto loss = torch::nn::functional::cross_entropy(forward(batch.inputs), batch.targets);
    const double value = loss.item<double>();
    if (!std::isfinite(value))
      throw NumericalError("non-finite classifier loss at iteration " + std::to_string(it));
    opt.zero_grad();
    loss.backward();
    if (config.max_grad_norm > 0) torch::nn::utils::clip_grad_norm_(model.parameters(), config.max_grad_norm);
    opt.step();
    losses.push_back(value);
  }
  return losses;
}

TrainedClassifier train_classifier(const ClfTrainConfig& config, const ClassifierSpec& spec,
                                   const data::DomainDataset& train_set, const BatchObserver& observer) {
  config.validate();
  if (train_set.empty()) throw ValidationError("empty training set");
  if (train_set.counts().healthy == 0 || train_set.counts().celiac == 0)
    throw ValidationError("training set holds a single label");
  for (const auto& p : train_set.patches())
    if (p.image().height < spec.crop_size || p.image().width < spec.crop_size)
      throw ValidationError("patch '" + p.source_id + "' is smaller than the " + std::to_string(spec.crop_size) +
                            " crop");

  TrainedClassifier out;
  out.model = build_classifier(spec, config.seed);
  // Dropout draws from the global torch generator.
  torch::manual_seed(config.seed ^ 0xd0d0ULL);
  Rng rng = Rng(config.seed).fork(0xba7cULL);

  auto source = [&](std::int64_t it) {
    std::vector<const data::ImagePatch*> chosen;
    std::vector<data::Image> images;
    std::vector<int64_t> targets;
    for (int i = 0; i < config.batch_size; ++i) {
      const auto& p = train_set[static_cast<std::size_t>(rng.below(train_set.size()))];
      chosen.push_back(&p);
      data::Image img;
      if (config.augment) {
        img = data::random_crop(p, spec.crop_size, rng).patch.image();
        img = data::dihedral_transform(img, static_cast<int>(rng.below(data::kDihedralOrder)));
      } else {
        img = data::center_crop(p.image(), spec.crop_size);
      }
      images.push_back(std::move(img));
      targets.push_back(static_cast<int64_t>(p.label));
    }
    if (observer) observer(it, chosen);
    std::vector<const data::Image*> ptrs;
    for (const auto& img : images) ptrs.push_back(&img);
    return Batch{data::to_tensor(ptrs), torch::tensor(targets, torch::kInt64)};
  };
  auto model = out.model;
  out.losses = run_sgd(*model, [&](const torch::Tensor& x) { return model->forward(x); }, source, config);
  model->eval();
  return out;
}

Evaluation evaluate(Classifier& classifier, const data::DomainDataset& test_set, int batch_size) {
  if (test_set.empty()) throw ValidationError("empty test set");
  const int crop = classifier->spec().crop_size;
  const bool was_training = classifier->is_training();
  classifier->eval();
  const auto dtype = classifier->parameters().front().scalar_type();
  torch::NoGradGuard no_grad;

  Evaluation ev;
  ev.records.reserve(test_set.size());
  for (std::size_t start = 0; start < test_set.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(test_set.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<data::Image> crops;
    for (auto i = start; i < end; ++i) crops.push_back(data::center_crop(test_set[i].image(), crop));
    std::vector<const data::Image*> ptrs;
    for (const auto& c : crops) ptrs.push_back(&c);
    const auto probs = classifier->probabilities(data::to_tensor(ptrs).to(dtype)).to(torch::kFloat64);
    const auto best = probs.argmax(1);
    for (auto i = start; i < end; ++i) {
      const auto row = static_cast<int64_t>(i - start);
      const auto& p = test_set[i];
      PredictionRecord r;
      r.source_id = p.source_id;
      r.patient_id = p.patient_id;
      r.truth = p.label;
      const auto k = best[row].item<int64_t>();
      r.predicted = static_cast<data::Label>(k);
      r.probability = probs[row][k].item<double>();
      ev.records.push_back(std::move(r));
    }
  }
  ev.accuracy = accuracy_of(ev.records);
  if (was_training) classifier->train();
  return ev;
}

double accuracy_of(const std::vector<PredictionRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& r : records) correct += r.correct() ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

std::string format_records(const std::vector<PredictionRecord>& records) {
  std::ostringstream out;
  out << "source_id,true,pred,prob,patient_id\n";
  char prob[32];
  for (const auto& r : records) {
    std::snprintf(prob, sizeof prob, "%.17g", r.probability);
    out << r.source_id << ',' << data::to_string(r.truth) << ',' << data::to_string(r.predicted) << ',' << prob << ','
        << r.patient_id << '\n';
  }
  return out.str();
}

std::vector<PredictionRecord> parse_records(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<PredictionRecord> out;
  int line_no = 0;
  bool with_patient = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      with_patient = line == "source_id,true,pred,prob,patient_id";
      if (!with_patient && line != "source_id,true,pred,prob")
        throw ParseError("prediction records: bad header '" + line + "'");
      continue;
    }
    std::istringstream row(line);
    std::string id, truth, pred, prob, patient;
    const bool ok = std::getline(row, id, ',') && std::getline(row, truth, ',') && std::getline(row, pred, ',') &&
                    (with_patient ? std::getline(row, prob, ',') && std::getline(row, patient)
                                  : static_cast<bool>(std::getline(row, prob)));
    if (!ok || (!with_patient && prob.find(',') != std::string::npos))
      throw ParseError("prediction records line " + std::to_string(line_no) + ": expected " +
                       (with_patient ? "5" : "4") + " fields");
    const auto t = data::parse_label(truth);
    const auto p = data::parse_label(pred);
    if (!t || !p) throw ParseError("prediction records line " + std::to_string(line_no) + ": bad label");
    PredictionRecord r;
    r.source_id = id;
    r.patient_id = patient;
    r.truth = *t;
    r.predicted = *p;
    try {
      r.probability = std::stod(prob);
    } catch (const std::exception&) {
      throw ParseError("prediction records line " + std::to_string(line_no) + ": bad probability");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace nbi::classification
