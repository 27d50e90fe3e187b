#include "nbi/data/folds.hpp"

#include "nbi/common/error.hpp"
#include "nbi/common/rng.hpp"

namespace nbi::data {

PatientFoldPlan::PatientFoldPlan(int k, std::map<std::string, int> assignment)
    : k_(k), assignment_(std::move(assignment)) {
  if (k_ < 2) throw ValidationError("fold count must be at least 2");
  for (const auto& [patient, fold] : assignment_)
    if (fold < 0 || fold >= k_) throw ValidationError("patient '" + patient + "' has fold outside [0, k)");
}

int PatientFoldPlan::fold_of(const std::string& patient_id) const {
  const auto it = assignment_.find(patient_id);
  if (it == assignment_.end()) throw ValidationError("patient '" + patient_id + "' is not in the fold plan");
  return it->second;
}

std::vector<std::string> PatientFoldPlan::patients_in(int fold) const {
  std::vector<std::string> out;
  for (const auto& [patient, f] : assignment_)
    if (f == fold) out.push_back(patient);
  return out;
}

std::vector<std::size_t> PatientFoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
  for (const auto& [_, f] : assignment_) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

DomainDataset PatientFoldPlan::training_part(const DomainDataset& dataset, int fold) const {
  return dataset.filter([&](const ImagePatch& p) { return fold_of(p.patient_id) != fold; });
}

DomainDataset PatientFoldPlan::test_part(const DomainDataset& dataset, int fold) const {
  return dataset.filter([&](const ImagePatch& p) { return fold_of(p.patient_id) == fold; });
}

PatientFoldPlan assign_folds(const std::set<std::string>& patients, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be at least 2, got " + std::to_string(k));
  if (patients.size() < static_cast<std::size_t>(k))
    throw ValidationError(std::to_string(patients.size()) + " patients cannot fill " + std::to_string(k) +
                          " folds");
  std::vector<std::string> order(patients.begin(), patients.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));
  std::map<std::string, int> assignment;
  for (std::size_t i = 0; i < order.size(); ++i) assignment[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return PatientFoldPlan(k, std::move(assignment));
}

PatientFoldPlan assign_folds(const std::vector<const DomainDataset*>& datasets, int k, std::uint64_t seed) {
  std::set<std::string> patients;
  for (const auto* ds : datasets)
    for (const auto& p : ds->patches()) patients.insert(p.patient_id);
  return assign_folds(patients, k, seed);
}

}  // namespace nbi::data
