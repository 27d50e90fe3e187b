#pragma once

#include <optional>
#include <string_view>

#include "nbi/data/augment.hpp"
#include "nbi/data/dataset.hpp"
#include "nbi/translation/bundle.hpp"

namespace nbi::translation {

enum class Direction { wli_to_nbi, nbi_to_wli };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);

/// Real tag consumed and fake tag produced by a direction.
data::DomainTag source_tag(Direction d);
data::DomainTag target_tag(Direction d);

/// Maps every patch through the matching generator. Patches smaller than the
/// bundle's canvas are padded for inference and cropped back afterwards.
/// Labels, patient ids, source ids and order are kept; the result is tagged
/// with the fake target domain. No stochastic augmentation is applied.
/// Throws ValidationError if the dataset is not the direction's real source.
data::DomainDataset translate_dataset(const TranslationBundle& bundle, const data::DomainDataset& dataset,
                                      Direction direction, const data::PadOptions& pad = {}, int batch_size = 8);

}  // namespace nbi::translation
