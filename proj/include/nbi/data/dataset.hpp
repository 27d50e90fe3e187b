#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "nbi/data/image.hpp"
#include "nbi/data/types.hpp"

namespace nbi::data {

/// One labelled RGB patch. Pixels are shared and immutable, so copying a
/// patch (e.g. when merging datasets) never copies image data.
struct ImagePatch {
  std::shared_ptr<const Image> pixels;
  Label label = Label::healthy;
  std::string patient_id;
  Modality modality = Modality::wli;
  Provenance provenance = Provenance::real;
  /// Originating file; for fakes, the source_id of the real patch translated.
  std::string source_id;

  DomainTag tag() const { return tag_of(modality, provenance); }
  const Image& image() const { return *pixels; }
  ImagePatch with_pixels(Image image) const;
};

struct LabelCounts {
  std::size_t healthy = 0;
  std::size_t celiac = 0;

  std::size_t total() const { return healthy + celiac; }
  bool operator==(const LabelCounts&) const = default;
};

LabelCounts count_labels(const std::vector<ImagePatch>& patches);

/// Immutable collection of patches. A dataset built from one source carries
/// exactly one tag and every patch matches it; merge_datasets produces
/// composites whose tag set is the union of the inputs.
class DomainDataset {
 public:
  DomainDataset() = default;
  /// Homogeneous dataset. Throws ValidationError if a patch has another tag.
  DomainDataset(DomainTag tag, std::vector<ImagePatch> patches);

  const std::vector<ImagePatch>& patches() const { return patches_; }
  const ImagePatch& operator[](std::size_t i) const { return patches_[i]; }
  std::size_t size() const { return patches_.size(); }
  bool empty() const { return patches_.empty(); }
  TagSet tags() const { return tags_; }
  bool is_composite() const { return composite_; }
  const LabelCounts& counts() const { return counts_; }

  std::set<std::string> patient_ids() const;

  /// Subset keeping tags and composite flag.
  DomainDataset filter(const std::function<bool(const ImagePatch&)>& keep) const;

  friend DomainDataset merge_datasets(const DomainDataset& a, const DomainDataset& b);

 private:
  std::vector<ImagePatch> patches_;
  TagSet tags_;
  bool composite_ = false;
  LabelCounts counts_;
};

/// Multiset union; duplicates are kept.
DomainDataset merge_datasets(const DomainDataset& a, const DomainDataset& b);

}  // namespace nbi::data
