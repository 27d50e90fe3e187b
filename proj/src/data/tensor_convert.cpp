#include "nbi/data/tensor_convert.hpp"

#include "nbi/common/error.hpp"

namespace nbi::data {

torch::Tensor to_tensor(const std::vector<const Image*>& images) {
  if (images.empty()) throw ValidationError("cannot batch zero images");
  const int h = images.front()->height;
  const int w = images.front()->width;
  auto batch = torch::empty({static_cast<int64_t>(images.size()), h, w, kChannels}, torch::kFloat32);
  auto* dst = batch.data_ptr<float>();
  for (const auto* img : images) {
    if (img->height != h || img->width != w) throw ValidationError("batch images differ in size");
    dst = std::copy(img->values.begin(), img->values.end(), dst);
  }
  return batch.permute({0, 3, 1, 2}).contiguous();
}

torch::Tensor to_tensor(const Image& image) { return to_tensor(std::vector<const Image*>{&image}); }

Image from_tensor(const torch::Tensor& chw) {
  auto t = chw.detach().to(torch::kCPU, torch::kFloat32);
  if (t.dim() == 4 && t.size(0) == 1) t = t.squeeze(0);
  if (t.dim() != 3 || t.size(0) != kChannels) throw ValidationError("expected a (3, H, W) tensor");
  t = t.permute({1, 2, 0}).contiguous();
  Image img(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)));
  std::copy(t.data_ptr<float>(), t.data_ptr<float>() + t.numel(), img.values.begin());
  return img;
}

}  // namespace nbi::data
