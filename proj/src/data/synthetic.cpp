#include "nbi/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nbi/common/error.hpp"
#include "nbi/common/rng.hpp"

namespace nbi::data {

namespace {

double draw(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Intensities are drawn in [0, 1] and stored in [-1, 1].
Image scene(int side, Label label, Rng& rng) {
  const double freq = draw(rng, 2, 5), phase = draw(rng, 0, 2 * std::numbers::pi);
  const double theta = draw(rng, 0, std::numbers::pi);
  const double cx = draw(rng, 0.3, 0.7), cy = draw(rng, 0.3, 0.7), radius = draw(rng, 0.15, 0.25);
  double fg[3] = {0.85, 0.55, 0.3};
  for (double& v : fg) v += draw(rng, -0.1, 0.1);

  Image img;
  img.height = img.width = side;
  img.values.resize(static_cast<std::size_t>(side) * side * 3);
  const double scale = side > 1 ? side - 1 : 1;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double y = r / scale, x = c / scale;
      const double tex =
          0.5 + 0.5 * std::sin(2 * std::numbers::pi * freq * (std::cos(theta) * x + std::sin(theta) * y) + phase);
      const bool inside = label == Label::healthy
                              ? (x - cx) * (x - cx) + (y - cy) * (y - cy) < radius * radius
                              : std::abs(x - cx) < 0.85 * radius && std::abs(y - cy) < 0.85 * radius;
      double px[3];
      if (inside) {
        for (int ch = 0; ch < 3; ++ch) px[ch] = fg[ch] * (0.85 + 0.15 * tex);
      } else {
        px[0] = 0.15 + 0.2 * tex;
        px[1] = 0.25 + 0.15 * tex;
        px[2] = 0.35 + 0.1 * tex;
      }
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(2 * px[ch] - 1);
    }
  }
  return img;
}

std::vector<ImagePatch> domain(const SyntheticOptions& o, Rng& rng, Modality modality, const std::string& prefix) {
  std::vector<ImagePatch> out;
  int index = 0;
  for (Label label : {Label::healthy, Label::celiac}) {
    for (int i = 0; i < o.per_class; ++i, ++index) {
      ImagePatch p;
      p.pixels = std::make_shared<const Image>(scene(o.side, label, rng));
      p.label = label;
      p.patient_id = "p" + std::to_string(index % o.patients);
      p.modality = modality;
      p.source_id = prefix + std::to_string(index);
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace

Image remap_color(const Image& image) {
  Image out = image;
  static constexpr int kFrom[3] = {2, 0, 1};
  for (int r = 0; r < image.height; ++r)
    for (int c = 0; c < image.width; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::clamp((image.at(r, c, kFrom[ch]) + 1.0) / 2.0, 0.0, 1.0);
        out.at(r, c, ch) = static_cast<float>(2 * (1 - std::pow(v, 0.6)) - 1);
      }
  return out;
}

SyntheticTask make_synthetic_task(const SyntheticOptions& o) {
  if (o.side < 8 || o.per_class < 1 || o.patients < 1)
    throw ValidationError("synthetic task needs side >= 8, per_class >= 1, patients >= 1");
  Rng rng(o.seed);
  Rng rx = rng.fork(1), ry = rng.fork(2);
  SyntheticTask task;
  task.x = DomainDataset(DomainTag::wli, domain(o, rx, Modality::wli, "x"));
  auto content = domain(o, ry, Modality::wli, "y");
  std::vector<ImagePatch> remapped;
  for (const auto& p : content) {
    auto q = p.with_pixels(remap_color(p.image()));
    q.modality = Modality::nbi;
    remapped.push_back(std::move(q));
  }
  task.y = DomainDataset(DomainTag::nbi, std::move(remapped));
  task.y_content = DomainDataset(DomainTag::wli, std::move(content));
  return task;
}

}  // namespace nbi::data
