#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udderid/evaluation.hpp"
#include "udderid/features.hpp"
#include "udderid/geometry.hpp"
#include "udderid/image.hpp"

namespace udderid {

struct ManifestEntry {
  std::string cow_id;
  int day = 1;
  std::optional<std::filesystem::path> image;  // absent for geometry-only data
  double rotation_deg = 0;
  std::optional<CropRect> crop;  // absent: the whole rotated frame
  std::filesystem::path annotation;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// One collection of frames. Relative paths inside the file are resolved
/// against the manifest's directory on load and kept absolute in memory.
struct Manifest {
  int collection = 1;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// Throws ParseError (malformed JSON), SchemaViolation (missing or mistyped
/// fields, wrong schema version) or DuplicateEntry (repeated cow/day).
Manifest parse_manifest(std::string_view json, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

/// Paths under the manifest's directory are written relative to it.
std::string manifest_json(const Manifest& manifest, const std::filesystem::path& base_dir);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Throws ParseError (malformed JSON, unknown position), MissingTeat,
/// DuplicatePosition or NonPositiveBox.
UdderAnnotation parse_annotation(std::string_view json);
std::string annotation_json(const UdderAnnotation& ann);
UdderAnnotation load_annotation(const std::filesystem::path& path);

/// Writes through a temporary file and a rename, creating parent
/// directories as needed.
void save_annotation(const UdderAnnotation& ann, const std::filesystem::path& path);

/// Writes `contents` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Preprocessed frame for an entry: load, rotate, crop.
GrayImage preprocess_frame(const ManifestEntry& entry);

/// Feature vector of one manifest entry; geometry first, then texture, for
/// the combined layout.
FeatureVector extract_features(const ManifestEntry& entry, FeatureLayout layout, bool normalize = false);

struct ExtractionFailure {
  std::string cow_id;
  int collection = 1;
  int day = 1;
  std::string message;
};

struct ExtractionResult {
  Dataset dataset;
  std::vector<ExtractionFailure> failures;
};

/// Extracts every entry of every manifest; failures are collected with the
/// sample identity instead of aborting.
ExtractionResult extract_dataset(std::span<const Manifest> manifests, FeatureLayout layout, bool normalize = false);

/// Header `cow_id,collection,day,f0..f{d-1}`, one row per sample.
std::string features_csv(const Dataset& ds, FeatureLayout layout);
void export_features(const Dataset& ds, FeatureLayout layout, const std::filesystem::path& path);
Dataset import_features(const std::filesystem::path& path);

}  // namespace udderid
