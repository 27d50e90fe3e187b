#include "nbi/translation/translate.hpp"

#include "nbi/common/error.hpp"
#include "nbi/data/tensor_convert.hpp"

namespace nbi::translation {

std::string_view to_string(Direction d) { return d == Direction::wli_to_nbi ? "WLI->NBI" : "NBI->WLI"; }

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "WLI->NBI" || text == "wli2nbi" || text == "X->Y") return Direction::wli_to_nbi;
  if (text == "NBI->WLI" || text == "nbi2wli" || text == "Y->X") return Direction::nbi_to_wli;
  return std::nullopt;
}

data::DomainTag source_tag(Direction d) {
  return d == Direction::wli_to_nbi ? data::DomainTag::wli : data::DomainTag::nbi;
}

data::DomainTag target_tag(Direction d) {
  return d == Direction::wli_to_nbi ? data::DomainTag::nbi_fake : data::DomainTag::wli_fake;
}

data::DomainDataset translate_dataset(const TranslationBundle& bundle, const data::DomainDataset& dataset,
                                      Direction direction, const data::PadOptions& pad, int batch_size) {
  const auto src = source_tag(direction);
  if (dataset.is_composite() || (!dataset.empty() && !(dataset.tags() == data::TagSet{src})))
    throw ValidationError("translation " + std::string(to_string(direction)) + " needs a " +
                          std::string(data::to_string(src)) + " dataset, got " + data::to_string(dataset.tags()));
  if (batch_size < 1) throw ValidationError("batch size must be positive");

  auto generator = direction == Direction::wli_to_nbi ? bundle.wli_to_nbi : bundle.nbi_to_wli;
  const bool was_training = generator->is_training();
  generator->eval();
  const auto dtype = generator->parameters().front().scalar_type();

  std::vector<data::ImagePatch> out;
  out.reserve(dataset.size());
  torch::NoGradGuard no_grad;
  for (std::size_t start = 0; start < dataset.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto end = std::min(dataset.size(), start + static_cast<std::size_t>(batch_size));
    // Every image is brought to the canvas, so a batch always stacks.
    std::vector<data::Image> padded;
    for (auto i = start; i < end; ++i) padded.push_back(data::pad_to_canvas(dataset[i].image(), bundle.canvas, pad));
    std::vector<const data::Image*> ptrs;
    for (const auto& img : padded) ptrs.push_back(&img);
    const auto result = generator->forward(data::to_tensor(ptrs).to(dtype));
    for (auto i = start; i < end; ++i) {
      const auto& src_patch = dataset[i];
      data::Image translated = data::from_tensor(result[static_cast<int64_t>(i - start)]);
      const auto& original = src_patch.image();
      if (translated.height != original.height || translated.width != original.width) {
        const auto off = data::canvas_offset(original.height, original.width, bundle.canvas);
        data::Image cropped(original.height, original.width);
        for (int r = 0; r < original.height; ++r)
          for (int c = 0; c < original.width; ++c)
            for (int ch = 0; ch < data::kChannels; ++ch)
              cropped.at(r, c, ch) = translated.at(r + off.row, c + off.col, ch);
        translated = std::move(cropped);
      }
      data::ImagePatch fake = src_patch.with_pixels(std::move(translated));
      fake.modality = data::modality_of(target_tag(direction));
      fake.provenance = data::Provenance::fake;
      out.push_back(std::move(fake));
    }
  }
  if (was_training) generator->train();
  return data::DomainDataset(target_tag(direction), std::move(out));
}

}  // namespace nbi::translation
