#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nbi/data/dataset.hpp"

namespace nbi::data {

/// Patient-level k-way partition shared by every dataset of a study:
/// a patient has one fold whatever domain, real or translated, the patch
/// comes from.
class PatientFoldPlan {
 public:
  PatientFoldPlan(int k, std::map<std::string, int> assignment);

  int k() const { return k_; }
  const std::map<std::string, int>& assignment() const { return assignment_; }

  /// Throws ValidationError for a patient the plan does not cover.
  int fold_of(const std::string& patient_id) const;
  bool covers(const std::string& patient_id) const { return assignment_.count(patient_id) != 0; }

  std::vector<std::string> patients_in(int fold) const;
  std::vector<std::size_t> fold_sizes() const;

  /// Patches of patients outside / inside `fold`.
  DomainDataset training_part(const DomainDataset& dataset, int fold) const;
  DomainDataset test_part(const DomainDataset& dataset, int fold) const;

  bool operator==(const PatientFoldPlan&) const = default;

 private:
  int k_;
  std::map<std::string, int> assignment_;
};

/// Sorts the union of patient ids, shuffles it with `seed` and deals the
/// patients round-robin, so fold sizes differ by at most one.
/// Throws ValidationError when k < 2 or there are fewer than k patients.
PatientFoldPlan assign_folds(const std::vector<const DomainDataset*>& datasets, int k, std::uint64_t seed);
PatientFoldPlan assign_folds(const std::set<std::string>& patients, int k, std::uint64_t seed);

}  // namespace nbi::data
