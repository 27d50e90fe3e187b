#include "nbi/data/manifest.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "nbi/common/error.hpp"
#include "nbi/data/image_io.hpp"

namespace nbi::data {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// File names are derived from source ids, which may contain '/'.
std::string file_stem_for(const std::string& source_id, std::size_t index) {
  std::string stem;
  for (char c : source_id) stem += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return std::to_string(index) + "_" + stem;
}

}  // namespace

DomainDataset load_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("manifest not found: " + path.string());
  const auto base = path.parent_path();
  const std::string where = "manifest " + path.string();

  std::map<std::string, std::size_t> columns;
  std::vector<ImagePatch> patches;
  std::set<std::string> seen_sources;
  std::optional<DomainTag> tag;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty() || content.front() == '#') continue;
    auto fields = split_row(content);

    if (columns.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) columns[fields[i]] = i;
      for (const char* required : {"path", "patient_id", "label", "domain"})
        if (!columns.count(required))
          throw ParseError(where + ": header lacks column '" + required + "'");
      for (const auto& [name, _] : columns)
        if (name != "path" && name != "patient_id" && name != "label" && name != "domain" &&
            name != "provenance" && name != "source_id")
          throw ParseError(where + ": unknown column '" + name + "'");
      continue;
    }

    const std::string row = where + " line " + std::to_string(line_no);
    if (fields.size() != columns.size())
      throw ParseError(row + ": expected " + std::to_string(columns.size()) + " fields, got " +
                       std::to_string(fields.size()));
    auto field = [&](const char* name) -> const std::string& { return fields[columns.at(name)]; };

    const auto& rel = field("path");
    if (rel.empty()) throw ParseError(row + ": empty path");
    if (field("patient_id").empty()) throw ParseError(row + ": empty patient_id");
    const auto label = parse_label(field("label"));
    if (!label) throw ParseError(row + ": label must be healthy|celiac, got '" + field("label") + "'");
    const auto modality = parse_modality(field("domain"));
    if (!modality) throw ParseError(row + ": domain must be WLI|NBI, got '" + field("domain") + "'");
    Provenance provenance = Provenance::real;
    if (columns.count("provenance")) {
      const auto p = parse_provenance(field("provenance"));
      if (!p) throw ParseError(row + ": provenance must be real|fake, got '" + field("provenance") + "'");
      provenance = *p;
    }
    std::string source_id = rel;
    if (columns.count("source_id") && !field("source_id").empty()) source_id = field("source_id");
    if (provenance == Provenance::fake && (!columns.count("source_id") || field("source_id").empty()))
      throw ParseError(row + ": fake patches need a source_id");

    const auto row_tag = tag_of(*modality, provenance);
    if (tag && *tag != row_tag)
      throw ValidationError(row + ": mixes " + std::string(to_string(row_tag)) + " into a " +
                            std::string(to_string(*tag)) + " manifest");
    tag = row_tag;
    if (!seen_sources.insert(source_id).second)
      throw ValidationError(row + ": duplicate source_id '" + source_id + "'");

    const auto image_path = base / rel;
    Image image = read_image(image_path);
    if (image.height != options.image_side || image.width != options.image_side)
      throw ValidationError(image_path.string() + ": image is " + std::to_string(image.height) + "x" +
                            std::to_string(image.width) + ", expected " + std::to_string(options.image_side) +
                            "x" + std::to_string(options.image_side));

    ImagePatch patch;
    patch.pixels = std::make_shared<const Image>(std::move(image));
    patch.label = *label;
    patch.patient_id = field("patient_id");
    patch.modality = *modality;
    patch.provenance = provenance;
    patch.source_id = std::move(source_id);
    patches.push_back(std::move(patch));
  }

  if (!tag) return DomainDataset{};
  return DomainDataset(*tag, std::move(patches));
}

void write_manifest(const std::filesystem::path& path, const DomainDataset& dataset, const std::string& image_dir,
                    const std::string& comment) {
  const auto base = path.parent_path();
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "path,patient_id,label,domain,provenance,source_id\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& p = dataset[i];
    const std::string rel = image_dir + "/" + file_stem_for(p.source_id, i) + ".png";
    write_image(base / rel, p.image());
    out << rel << ',' << p.patient_id << ',' << to_string(p.label) << ',' << to_string(p.modality) << ','
        << to_string(p.provenance) << ',' << p.source_id << '\n';
  }
  if (!base.empty()) std::filesystem::create_directories(base);
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot write manifest " + path.string());
  file << out.str();
}

}  // namespace nbi::data
