#include "nbi/data/types.hpp"


namespace nbi::data {

std::string_view to_string(Label label) { return label == Label::healthy ? "healthy" : "celiac"; }

std::string_view to_string(Modality modality) { return modality == Modality::wli ? "WLI" : "NBI"; }

std::string_view to_string(Provenance provenance) { return provenance == Provenance::real ? "real" : "fake"; }

std::string_view to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::wli: return "WLI";
    case DomainTag::nbi: return "NBI";
    case DomainTag::wli_fake: return "WLI_f";
    case DomainTag::nbi_fake: return "NBI_f";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "healthy") return Label::healthy;
  if (text == "celiac") return Label::celiac;
  return std::nullopt;
}

std::optional<Modality> parse_modality(std::string_view text) {
  if (text == "WLI") return Modality::wli;
  if (text == "NBI") return Modality::nbi;
  return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  if (text == "real") return Provenance::real;
  if (text == "fake") return Provenance::fake;
  return std::nullopt;
}

std::optional<DomainTag> parse_tag(std::string_view text) {
  for (auto t : kAllTags)
    if (to_string(t) == text) return t;
  return std::nullopt;
}

std::string to_string(TagSet tags) {
  if (tags.empty()) return "{}";
  std::string out;
  for (auto t : kAllTags) {
    if (!tags.contains(t)) continue;
    if (!out.empty()) out += " \xE2\x88\xAA ";  // U+222A
    out += to_string(t);
  }
  return out;
}

std::optional<TagSet> parse_tag_set(std::string_view text) {
  TagSet out;
  std::string token;
  auto flush = [&]() -> bool {
    auto b = token.find_first_not_of(' ');
    auto e = token.find_last_not_of(' ');
    if (b == std::string::npos) return false;
    auto tag = parse_tag(std::string_view(token).substr(b, e - b + 1));
    token.clear();
    if (!tag) return false;
    out.insert(*tag);
    return true;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '+' || text[i] == ',') {
      if (!flush()) return std::nullopt;
    } else if (text.substr(i, 3) == "\xE2\x88\xAA") {
      if (!flush()) return std::nullopt;
      i += 2;
    } else {
      token += text[i];
    }
  }
  if (!flush()) return std::nullopt;
  return out;
}

}  // namespace nbi::data
