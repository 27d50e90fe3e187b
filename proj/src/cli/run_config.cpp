#include "nbi/cli/run_config.hpp"

#include <fstream>

#include "nbi/common/error.hpp"
#include "nbi/common/files.hpp"
#include "nbi/common/hash.hpp"

namespace nbi::cli {

using classification::Architecture;

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  gan.seed = s;
  classifier.seed = s;
}

std::vector<classification::ClassifierSpec> RunConfig::specs(const std::vector<Architecture>& archs) const {
  std::vector<classification::ClassifierSpec> out;
  for (auto a : archs) out.push_back(classification::ClassifierSpec::make(a, scale));
  return out;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  if (!j.contains("seed")) throw ValidationError("config lacks the mandatory 'seed'");
  RunConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") {
        if (!value.is_number_integer() || value.get<std::int64_t>() < 0) throw ValidationError("seed must be a non-negative integer");
      } else if (key == "data") {
        for (const auto& [k, v] : value.items()) {
          if (k == "wli_manifest") c.data.wli_manifest = resolve(base_dir, v.get<std::string>());
          else if (k == "nbi_manifest") c.data.nbi_manifest = resolve(base_dir, v.get<std::string>());
          else if (k == "image_side") c.data.image_side = v;
          else throw ValidationError("unknown key data." + k);
        }
      } else if (key == "gan") {
        for (const char* k : {"seed", "checkpoint_path", "loss_log"})
          if (value.contains(k)) throw ValidationError(std::string("gan.") + k + " is set by the tool, not the config");
        c.gan = translation::gan_config_from_json(value);
      } else if (key == "classifier") {
        if (value.contains("seed")) throw ValidationError("classifier.seed is taken from the top-level seed");
        auto section = value;
        if (section.contains("scale")) {
          const std::string s = section["scale"];
          if (s == "full") c.scale = classification::Scale::full;
          else if (s == "compact") c.scale = classification::Scale::compact;
          else throw ValidationError("classifier.scale must be full|compact");
          section.erase("scale");
        }
        c.classifier = classification::clf_config_from_json(section);
      } else if (key == "experiment") {
        for (const auto& [k, v] : value.items()) {
          if (k == "folds") c.experiment.folds = v;
          else if (k == "per_fold_gan") c.experiment.per_fold_gan = v;
          else throw ValidationError("unknown key experiment." + k);
        }
      } else if (key == "translate_batch") {
        c.translate_batch = value;
      } else if (key == "output") {
        c.output = resolve(base_dir, value.get<std::string>());
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.set_seed(j.at("seed").get<std::uint64_t>());
  c.gan.validate();
  c.classifier.validate();
  if (c.experiment.folds < 2) throw ValidationError("experiment.folds must be >= 2");
  if (c.translate_batch < 1) throw ValidationError("translate_batch must be >= 1");
  if (c.data.image_side < 1) throw ValidationError("data.image_side must be positive");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j, std::filesystem::absolute(path).parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  auto gan = translation::to_json(c.gan);
  gan.erase("seed");
  auto clf = classification::to_json(c.classifier);
  clf.erase("seed");
  clf["scale"] = classification::to_string(c.scale);
  return {{"seed", c.seed},
          {"data",
           {{"wli_manifest", c.data.wli_manifest.string()},
            {"nbi_manifest", c.data.nbi_manifest.string()},
            {"image_side", c.data.image_side}}},
          {"gan", gan},
          {"classifier", clf},
          {"experiment", {{"folds", c.experiment.folds}, {"per_fold_gan", c.experiment.per_fold_gan}}},
          {"translate_batch", c.translate_batch},
          {"output", c.output.string()}};
}

std::string run_hash(const RunConfig& config) {
  auto j = to_json(config);
  j.erase("output");
  // Where the data lives does not matter, its content is hashed separately.
  j["data"].erase("wli_manifest");
  j["data"].erase("nbi_manifest");
  return config_hash(j);
}

std::vector<Architecture> parse_architectures(const std::string& text) {
  if (text == "all") return {Architecture::vggf, Architecture::alexnet, Architecture::vgg16};
  const auto a = classification::parse_architecture(text);
  if (!a) throw ValidationError("unknown architecture '" + text + "' (alexnet|vggf|vgg16|all)");
  return {*a};
}

}  // namespace nbi::cli
