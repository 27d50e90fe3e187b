#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nbi/data/dataset.hpp"

namespace nbi::testing {

// Constant-colour patch; `value` in [-1, 1].
inline data::ImagePatch patch(const std::string& source, const std::string& patient, data::Label label,
                              data::Modality modality = data::Modality::wli, int side = 4, float value = 0.0f,
                              data::Provenance provenance = data::Provenance::real) {
  data::ImagePatch p;
  p.pixels = std::make_shared<const data::Image>(side, side, value);
  p.source_id = source;
  p.patient_id = patient;
  p.label = label;
  p.modality = modality;
  p.provenance = provenance;
  return p;
}

// `per_patient` patches per patient, labels alternating per patient.
inline data::DomainDataset toy_dataset(data::DomainTag tag, const std::vector<std::string>& patients,
                                       int per_patient, int side = 4) {
  std::vector<data::ImagePatch> out;
  for (std::size_t i = 0; i < patients.size(); ++i)
    for (int j = 0; j < per_patient; ++j) {
      auto p = patch(std::string(data::to_string(tag)) + "_" + patients[i] + "_" + std::to_string(j), patients[i],
                     i % 2 ? data::Label::celiac : data::Label::healthy, data::modality_of(tag), side);
      p.provenance = data::provenance_of(tag);
      out.push_back(std::move(p));
    }
  return data::DomainDataset(tag, std::move(out));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / (name + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace nbi::testing
