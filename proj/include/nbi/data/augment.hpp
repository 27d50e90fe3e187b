#pragma once

#include "nbi/common/rng.hpp"
#include "nbi/data/dataset.hpp"

namespace nbi::data {

enum class PadMode {
  /// Mirror the content outward (no edge repeat), folding as often as needed.
  reflect,
  constant,
};

struct PadOptions {
  PadMode mode = PadMode::reflect;
  float fill = -1.0f;  ///< used by PadMode::constant; -1 is black after normalization
};

struct Offset {
  int row = 0;
  int col = 0;
  bool operator==(const Offset&) const = default;
};

/// Top-left position of a `height`x`width` image centered on a square canvas.
Offset canvas_offset(int height, int width, int canvas);

/// Centers the patch on a canvas x canvas image. Metadata is kept.
/// Throws ValidationError if either side exceeds the canvas.
ImagePatch pad_to_canvas(const ImagePatch& patch, int canvas, const PadOptions& options = {});
Image pad_to_canvas(const Image& image, int canvas, const PadOptions& options = {});

Image crop(const Image& image, Offset offset, int size);
Image center_crop(const Image& image, int size);

struct CropResult {
  ImagePatch patch;
  Offset offset;
};

/// size x size window at a uniformly drawn offset. Throws ValidationError
/// when size exceeds either side.
CropResult random_crop(const ImagePatch& patch, int size, Rng& rng);

/// The 8 symmetries of the square. id = 4 * flip + quarter_turns: first an
/// optional horizontal (left-right) mirror, then `quarter_turns`
/// counter-clockwise rotations by 90 degrees. id 0 is the identity.
inline constexpr int kDihedralOrder = 8;

Image dihedral_transform(const Image& image, int transform_id);

/// Throws ValidationError for ids outside [0, 8).
ImagePatch dihedral_augment(const ImagePatch& patch, int transform_id);

/// Id of "apply first, then second".
int compose_dihedral(int first, int second);
int invert_dihedral(int transform_id);

}  // namespace nbi::data
