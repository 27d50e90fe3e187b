#pragma once

#include <filesystem>

#include "nbi/data/image.hpp"

namespace nbi::data {

/// Decodes any format OpenCV understands into a normalized RGB image.
/// Throws IoError naming the file when it is missing or cannot be decoded.
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB rendering (PNG by extension).
void write_image(const std::filesystem::path& path, const Image& image);

}  // namespace nbi::data
