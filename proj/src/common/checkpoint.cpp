#include "nbi/common/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nbi/common/error.hpp"

namespace nbi {
namespace {

constexpr char kMagic[8] = {'N', 'B', 'I', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint payload is little-endian");

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "f32";
    case torch::kFloat64: return "f64";
    case torch::kInt64: return "i64";
    default: throw ValidationError("checkpoint: unsupported tensor dtype " + std::string(c10::toString(t)));
  }
}

torch::ScalarType dtype_from_name(const std::string& name) {
  if (name == "f32") return torch::kFloat32;
  if (name == "f64") return torch::kFloat64;
  if (name == "i64") return torch::kInt64;
  throw ParseError("checkpoint: unknown dtype '" + name + "'");
}

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

}  // namespace

const torch::Tensor& Checkpoint::at(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw ValidationError("checkpoint: missing tensor '" + name + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json index = nlohmann::json::array();
  std::string payload;
  for (const auto& [name, value] : ckpt.tensors) {
    const auto t = value.detach().contiguous().cpu();
    const auto nbytes = static_cast<std::size_t>(t.numel()) * t.element_size();
    index.push_back({{"name", name},
                     {"dtype", dtype_name(t.scalar_type())},
                     {"shape", t.sizes().vec()},
                     {"offset", payload.size()},
                     {"nbytes", nbytes}});
    payload.append(static_cast<const char*>(t.data_ptr()), nbytes);
  }
  const nlohmann::json header = {{"meta", ckpt.meta}, {"tensors", index}};
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out += text;
  out += payload;
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw ParseError("checkpoint: bad magic");
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, 8);
  if (header_len > bytes.size() - 16) throw ParseError("checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: header is not valid JSON: ") + e.what());
  }
  const std::size_t base = 16 + header_len;

  Checkpoint ckpt;
  ckpt.meta = header.at("meta");
  for (const auto& entry : header.at("tensors")) {
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto nbytes = entry.at("nbytes").get<std::size_t>();
    if (base + offset + nbytes > bytes.size()) throw ParseError("checkpoint: truncated payload");
    const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
    auto t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from_name(entry.at("dtype"))));
    if (static_cast<std::size_t>(t.numel()) * t.element_size() != nbytes)
      throw ParseError("checkpoint: size mismatch for '" + entry.at("name").get<std::string>() + "'");
    std::memcpy(t.data_ptr(), bytes.data() + base + offset, nbytes);
    ckpt.tensors.push_back({entry.at("name").get<std::string>(), std::move(t)});
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    const auto bytes = serialize_checkpoint(ckpt);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write on " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

nlohmann::json read_checkpoint_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char head[16];
  if (!in.read(head, 16) || std::memcmp(head, kMagic, 8) != 0)
    throw ParseError("checkpoint: bad magic in " + path.string());
  std::uint64_t header_len = 0;
  std::memcpy(&header_len, head + 8, 8);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len)))
    throw ParseError("checkpoint: truncated header in " + path.string());
  return nlohmann::json::parse(text).at("meta");
}

void append_module_state(std::vector<NamedTensor>& out, const torch::nn::Module& module,
                         const std::string& prefix) {
  for (const auto& item : module.named_parameters(true)) out.push_back({prefix + item.key(), item.value()});
  for (const auto& item : module.named_buffers(true)) out.push_back({prefix + item.key(), item.value()});
}

void load_module_state(torch::nn::Module& module, const Checkpoint& ckpt, const std::string& prefix) {
  torch::NoGradGuard no_grad;
  auto copy_into = [&](const std::string& key, torch::Tensor& dst) {
    const auto& src = ckpt.at(prefix + key);
    if (src.sizes() != dst.sizes())
      throw ValidationError("checkpoint: shape mismatch for '" + prefix + key + "'");
    dst.copy_(src);
  };
  for (auto& item : module.named_parameters(true)) copy_into(item.key(), item.value());
  for (auto& item : module.named_buffers(true)) copy_into(item.key(), item.value());
}

}  // namespace nbi
