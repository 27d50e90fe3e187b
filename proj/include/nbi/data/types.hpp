#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nbi::data {

enum class Label : std::uint8_t { healthy = 0, celiac = 1 };

/// Imaging modality. WLI plays the X domain of the translation model, NBI the Y domain.
enum class Modality : std::uint8_t { wli = 0, nbi = 1 };

enum class Provenance : std::uint8_t { real = 0, fake = 1 };

/// Dataset identity: a modality plus where its images came from.
/// nbi_fake holds WLI patches translated to NBI, wli_fake the converse.
enum class DomainTag : std::uint8_t { wli = 0, nbi = 1, wli_fake = 2, nbi_fake = 3 };

inline constexpr std::array<DomainTag, 4> kAllTags = {DomainTag::wli, DomainTag::nbi, DomainTag::wli_fake,
                                                      DomainTag::nbi_fake};

std::string_view to_string(Label label);
std::string_view to_string(Modality modality);
std::string_view to_string(Provenance provenance);
/// "WLI", "NBI", "WLI_f", "NBI_f".
std::string_view to_string(DomainTag tag);

std::optional<Label> parse_label(std::string_view text);
std::optional<Modality> parse_modality(std::string_view text);
std::optional<Provenance> parse_provenance(std::string_view text);
std::optional<DomainTag> parse_tag(std::string_view text);

constexpr DomainTag tag_of(Modality modality, Provenance provenance) {
  if (provenance == Provenance::real) return modality == Modality::wli ? DomainTag::wli : DomainTag::nbi;
  return modality == Modality::wli ? DomainTag::wli_fake : DomainTag::nbi_fake;
}

constexpr Modality modality_of(DomainTag tag) {
  return (tag == DomainTag::wli || tag == DomainTag::wli_fake) ? Modality::wli : Modality::nbi;
}

constexpr Provenance provenance_of(DomainTag tag) {
  return (tag == DomainTag::wli || tag == DomainTag::nbi) ? Provenance::real : Provenance::fake;
}

/// Set of domain tags; describes both datasets built by merging and the
/// train/test compositions of an experiment row.
class TagSet {
 public:
  constexpr TagSet() = default;
  constexpr TagSet(std::initializer_list<DomainTag> tags) {
    for (auto t : tags) insert(t);
  }

  constexpr void insert(DomainTag t) { bits_ |= bit(t); }
  constexpr bool contains(DomainTag t) const { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const {
    int n = 0;
    for (auto t : kAllTags) n += contains(t) ? 1 : 0;
    return n;
  }
  constexpr TagSet operator|(TagSet other) const {
    TagSet r;
    r.bits_ = bits_ | other.bits_;
    return r;
  }
  constexpr bool operator==(const TagSet&) const = default;
  constexpr std::uint8_t bits() const { return bits_; }

 private:
  static constexpr std::uint8_t bit(DomainTag t) { return static_cast<std::uint8_t>(1U << static_cast<unsigned>(t)); }
  std::uint8_t bits_ = 0;
};

/// "NBI ∪ NBI_f" style rendering in canonical tag order; "{}" when empty.
std::string to_string(TagSet tags);
/// Accepts "NBI+NBI_f", "NBI,NBI_f" or "NBI∪NBI_f".
std::optional<TagSet> parse_tag_set(std::string_view text);

}  // namespace nbi::data
