#pragma once

#include <vector>

#include <torch/torch.h>

#include "nbi/data/image.hpp"

namespace nbi::data {

/// Stacks equally sized images into a float32 (N, 3, H, W) tensor.
torch::Tensor to_tensor(const std::vector<const Image*>& images);
torch::Tensor to_tensor(const Image& image);

/// One (3, H, W) or (1, 3, H, W) tensor back to an image.
Image from_tensor(const torch::Tensor& chw);

}  // namespace nbi::data
