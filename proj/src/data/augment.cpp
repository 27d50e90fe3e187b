#include "nbi/data/augment.hpp"

#include <string>

#include "nbi/common/error.hpp"

namespace nbi::data {
namespace {

// Index into [0, n) reflecting about the edges without repeating them
// (…2 1 | 0 1 2 … n-1 | n-2 …), periodic with period 2(n-1).
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void check_id(int transform_id) {
  if (transform_id < 0 || transform_id >= kDihedralOrder)
    throw ValidationError("dihedral transform id must be in [0, 8), got " + std::to_string(transform_id));
}

}  // namespace

Offset canvas_offset(int height, int width, int canvas) { return {(canvas - height) / 2, (canvas - width) / 2}; }

Image pad_to_canvas(const Image& image, int canvas, const PadOptions& options) {
  if (image.height > canvas || image.width > canvas)
    throw ValidationError("image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                          " exceeds canvas " + std::to_string(canvas));
  if (image.height == canvas && image.width == canvas) return image;
  const auto off = canvas_offset(image.height, image.width, canvas);
  Image out(canvas, canvas, options.fill);
  for (int r = 0; r < canvas; ++r) {
    const int sr = r - off.row;
    const bool row_inside = sr >= 0 && sr < image.height;
    for (int c = 0; c < canvas; ++c) {
      const int sc = c - off.col;
      const bool inside = row_inside && sc >= 0 && sc < image.width;
      if (!inside && options.mode == PadMode::constant) continue;
      const int rr = reflect_index(sr, image.height);
      const int cc = reflect_index(sc, image.width);
      for (int ch = 0; ch < kChannels; ++ch) out.at(r, c, ch) = image.at(rr, cc, ch);
    }
  }
  return out;
}

ImagePatch pad_to_canvas(const ImagePatch& patch, int canvas, const PadOptions& options) {
  if (patch.image().height == canvas && patch.image().width == canvas) return patch;
  return patch.with_pixels(pad_to_canvas(patch.image(), canvas, options));
}

Image crop(const Image& image, Offset offset, int size) {
  if (offset.row < 0 || offset.col < 0 || offset.row + size > image.height || offset.col + size > image.width)
    throw ValidationError("crop window outside image");
  Image out(size, size);
  for (int r = 0; r < size; ++r) {
    const auto* src = &image.values[(static_cast<std::size_t>(offset.row + r) * image.width + offset.col) * kChannels];
    std::copy(src, src + static_cast<std::size_t>(size) * kChannels,
              out.values.begin() + static_cast<std::ptrdiff_t>(r) * size * kChannels);
  }
  return out;
}

Image center_crop(const Image& image, int size) {
  if (size > image.height || size > image.width)
    throw ValidationError("crop size " + std::to_string(size) + " exceeds image side");
  return crop(image, {(image.height - size) / 2, (image.width - size) / 2}, size);
}

CropResult random_crop(const ImagePatch& patch, int size, Rng& rng) {
  const auto& img = patch.image();
  if (size <= 0 || size > img.height || size > img.width)
    throw ValidationError("crop size " + std::to_string(size) + " does not fit a " + std::to_string(img.height) +
                          "x" + std::to_string(img.width) + " patch");
  Offset off;
  off.row = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height - size + 1)));
  off.col = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width - size + 1)));
  if (size == img.height && size == img.width) return {patch, off};
  return {patch.with_pixels(crop(img, off, size)), off};
}

Image dihedral_transform(const Image& image, int transform_id) {
  check_id(transform_id);
  if (transform_id == 0) return image;
  const bool flip = transform_id >= 4;
  const int turns = transform_id % 4;
  const int h = image.height;
  const int w = image.width;
  const bool swap = turns % 2 == 1;
  Image out(swap ? w : h, swap ? h : w);
  for (int r = 0; r < h; ++r) {
    for (int c0 = 0; c0 < w; ++c0) {
      const int c = flip ? w - 1 - c0 : c0;  // position after the mirror
      // Counter-clockwise quarter turn maps (r, c) in an h x w image to
      // (w-1-c, r) in a w x h image.
      int orow = r, ocol = c, oh = h, ow = w;
      for (int t = 0; t < turns; ++t) {
        const int nr = ow - 1 - ocol;
        const int nc = orow;
        orow = nr;
        ocol = nc;
        std::swap(oh, ow);
      }
      for (int ch = 0; ch < kChannels; ++ch) out.at(orow, ocol, ch) = image.at(r, c0, ch);
    }
  }
  return out;
}

ImagePatch dihedral_augment(const ImagePatch& patch, int transform_id) {
  check_id(transform_id);
  if (transform_id == 0) return patch;
  return patch.with_pixels(dihedral_transform(patch.image(), transform_id));
}

int compose_dihedral(int first, int second) {
  check_id(first);
  check_id(second);
  // Elements are R^k M^f (mirror first). M R = R^-1 M, hence
  // (R^k2 M^f2)(R^k1 M^f1) = R^(k2 + (f2 ? -k1 : k1)) M^(f1 xor f2).
  const int f1 = first / 4, k1 = first % 4;
  const int f2 = second / 4, k2 = second % 4;
  const int k = ((k2 + (f2 ? -k1 : k1)) % 4 + 4) % 4;
  return 4 * (f1 ^ f2) + k;
}

int invert_dihedral(int transform_id) {
  check_id(transform_id);
  // Mirrored elements are involutions; rotations invert to 4 - k.
  if (transform_id >= 4) return transform_id;
  return (4 - transform_id) % 4;
}

}  // namespace nbi::data
