#include "nbi/data/image.hpp"

#include <algorithm>
#include <cmath>

namespace nbi::data {

std::uint8_t denormalize_u8(float v) {
  const float scaled = std::round((v + 1.0f) * 127.5f);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0f, 255.0f));
}

Image from_u8(int height, int width, const std::uint8_t* rgb) {
  Image img(height, width);
  std::transform(rgb, rgb + img.values.size(), img.values.begin(), normalize_u8);
  return img;
}

std::vector<std::uint8_t> to_u8(const Image& image) {
  std::vector<std::uint8_t> out(image.values.size());
  std::transform(image.values.begin(), image.values.end(), out.begin(), denormalize_u8);
  return out;
}

}  // namespace nbi::data
