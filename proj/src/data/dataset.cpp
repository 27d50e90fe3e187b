#include "nbi/data/dataset.hpp"

#include "nbi/common/error.hpp"

namespace nbi::data {

ImagePatch ImagePatch::with_pixels(Image image) const {
  ImagePatch out = *this;
  out.pixels = std::make_shared<const Image>(std::move(image));
  return out;
}

LabelCounts count_labels(const std::vector<ImagePatch>& patches) {
  LabelCounts c;
  for (const auto& p : patches) (p.label == Label::healthy ? c.healthy : c.celiac) += 1;
  return c;
}

DomainDataset::DomainDataset(DomainTag tag, std::vector<ImagePatch> patches)
    : patches_(std::move(patches)), tags_{tag} {
  for (const auto& p : patches_) {
    if (p.tag() != tag)
      throw ValidationError("patch '" + p.source_id + "' is " + std::string(to_string(p.tag())) +
                            " but dataset is " + std::string(to_string(tag)));
    if (!p.pixels) throw ValidationError("patch '" + p.source_id + "' has no pixels");
  }
  counts_ = count_labels(patches_);
}

std::set<std::string> DomainDataset::patient_ids() const {
  std::set<std::string> ids;
  for (const auto& p : patches_) ids.insert(p.patient_id);
  return ids;
}

DomainDataset DomainDataset::filter(const std::function<bool(const ImagePatch&)>& keep) const {
  DomainDataset out;
  out.tags_ = tags_;
  out.composite_ = composite_;
  for (const auto& p : patches_)
    if (keep(p)) out.patches_.push_back(p);
  out.counts_ = count_labels(out.patches_);
  return out;
}

DomainDataset merge_datasets(const DomainDataset& a, const DomainDataset& b) {
  DomainDataset out;
  out.patches_.reserve(a.size() + b.size());
  out.patches_.insert(out.patches_.end(), a.patches_.begin(), a.patches_.end());
  out.patches_.insert(out.patches_.end(), b.patches_.begin(), b.patches_.end());
  out.tags_ = a.tags_ | b.tags_;
  out.composite_ = true;
  out.counts_ = count_labels(out.patches_);
  return out;
}

}  // namespace nbi::data
