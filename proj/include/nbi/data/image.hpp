#pragma once

#include <cstdint>
#include <vector>

namespace nbi::data {

inline constexpr int kChannels = 3;

/// RGB image, row-major interleaved (HWC) floats. Patch pixels live in
/// [-1, 1]; see normalize_u8.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  Image() = default;
  Image(int h, int w, float fill = 0.0f)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w * kChannels, fill) {}

  float& at(int row, int col, int ch) { return values[index(row, col, ch)]; }
  float at(int row, int col, int ch) const { return values[index(row, col, ch)]; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width + col) * kChannels + ch;
  }
};

/// 8-bit intensity -> [-1, 1], linear.
constexpr float normalize_u8(std::uint8_t v) { return static_cast<float>(v) / 127.5f - 1.0f; }

/// Inverse of normalize_u8, rounding and saturating outside [-1, 1].
std::uint8_t denormalize_u8(float v);

Image from_u8(int height, int width, const std::uint8_t* rgb);
std::vector<std::uint8_t> to_u8(const Image& image);

}  // namespace nbi::data
