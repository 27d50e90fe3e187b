#pragma once

#include <cstdint>

#include "nbi/data/dataset.hpp"

namespace nbi::data {

/// Two-domain toy task standing in for the endoscopic corpora: a disk
/// (healthy) or square (celiac) on a striped background. Domain X is stored
/// as WLI, domain Y as NBI; Y shows different scenes than X and passes them
/// through remap_color.
struct SyntheticOptions {
  int side = 64;
  int per_class = 48;  ///< per domain
  int patients = 12;
  std::uint64_t seed = 0;
};

struct SyntheticTask {
  DomainDataset x;
  DomainDataset y;
  /// The Y scenes before the remap, tagged WLI (what a perfect Y->X
  /// translation would return).
  DomainDataset y_content;
};

SyntheticTask make_synthetic_task(const SyntheticOptions& options);

/// Fixed nonlinear color remap X -> Y on [-1, 1] images: channel rotation
/// (b, r, g), then 1 - v^0.6 on [0, 1] intensities.
Image remap_color(const Image& image);

}  // namespace nbi::data
