#pragma once

#include <filesystem>
#include <string>

#include "nbi/data/dataset.hpp"

namespace nbi::data {

struct ManifestOptions {
  /// Required side length of every image; no resizing is ever applied.
  int image_side = 256;
};

/// Reads a patch manifest.
///
/// Comma-separated text, UTF-8, with a header naming the columns. Required
/// columns: path, patient_id, label, domain. Optional: provenance (real|fake,
/// default real) and source_id (default: the path as written). Paths are
/// relative to the manifest's directory. Blank lines and lines starting with
/// '#' are ignored. All rows must describe the same domain tag.
///
/// Throws IoError (missing manifest or unreadable image), ParseError (bad
/// row, with its line number) or ValidationError (wrong image size, duplicate
/// source_id, mixed domains).
DomainDataset load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

/// Writes each patch as PNG under `image_dir` (relative to the manifest) and
/// the manifest itself, including provenance and source_id columns. A
/// non-empty `comment` becomes a leading '#' line.
void write_manifest(const std::filesystem::path& path, const DomainDataset& dataset,
                    const std::string& image_dir = "images", const std::string& comment = "");

}  // namespace nbi::data
