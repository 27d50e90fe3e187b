#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbi/classification/training.hpp"
#include "nbi/experiments/plan.hpp"
#include "nbi/translation/trainer.hpp"

namespace nbi::cli {

struct DataConfig {
  std::filesystem::path wli_manifest;
  std::filesystem::path nbi_manifest;
  int image_side = 256;
};

struct ExperimentConfig {
  int folds = 5;
  bool per_fold_gan = false;
};

/// Everything a run depends on. The top-level seed drives the GAN, the
/// classifiers and the fold plan; sections may not carry their own seeds.
struct RunConfig {
  std::uint64_t seed = 0;
  DataConfig data;
  translation::GanTrainConfig gan;
  classification::ClfTrainConfig classifier;
  classification::Scale scale = classification::Scale::full;
  ExperimentConfig experiment;
  int translate_batch = 8;
  std::filesystem::path output = "runs";

  /// Pushes `seed` into the sections.
  void set_seed(std::uint64_t s);
  std::vector<classification::ClassifierSpec> specs(const std::vector<classification::Architecture>& archs) const;
};

/// Rejects unknown keys and a missing seed. Relative paths are resolved
/// against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/// Hash of the settings that determine results; the output directory is
/// excluded so a run can be moved.
std::string run_hash(const RunConfig& config);

/// "all" or one architecture name; table order vggf, alexnet, vgg16.
std::vector<classification::Architecture> parse_architectures(const std::string& text);

}  // namespace nbi::cli
