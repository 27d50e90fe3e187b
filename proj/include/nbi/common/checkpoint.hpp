#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <torch/torch.h>

namespace nbi {

struct NamedTensor {
  std::string name;
  torch::Tensor value;
};

/// Self-describing parameter container shared by GAN bundles and classifiers.
///
/// Layout: 8-byte magic "NBICKPT1", little-endian u64 header length, a JSON
/// header ({"meta": ..., "tensors": [{name, dtype, shape, offset, nbytes}]})
/// and the concatenated raw tensor payload. Serialization is a pure function
/// of (meta, tensors), so save -> load -> save is byte-identical.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const torch::Tensor& at(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Header only; cheap way to check config hashes of existing artifacts.
nlohmann::json read_checkpoint_meta(const std::filesystem::path& path);

/// Parameters followed by buffers, in registration order, names prefixed.
void append_module_state(std::vector<NamedTensor>& out, const torch::nn::Module& module,
                         const std::string& prefix);

/// Copies tensors named `prefix + key` into the module. Every parameter and
/// buffer must be present with a matching shape.
void load_module_state(torch::nn::Module& module, const Checkpoint& ckpt, const std::string& prefix);

}  // namespace nbi
