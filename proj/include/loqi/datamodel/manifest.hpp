#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loqi/datamodel/degradation_spec.hpp"
#include "loqi/datamodel/geo.hpp"

namespace loqi {

enum class Split { database, query, train };

std::string to_string(Split split);
Split parse_split(std::string_view text);

/// How ground truth is decided: metric distance (meters) for latlon/utm
/// poses, frame distance for frame_index poses.
struct GroundTruthMode {
  enum class Kind { metric, index };
  Kind kind = Kind::metric;
  double threshold = 25.0;

  std::string to_string() const;
  static GroundTruthMode parse(std::string_view text);

  friend bool operator==(const GroundTruthMode&, const GroundTruthMode&) = default;
};

struct ImageRecord {
  std::string id;
  std::filesystem::path path;
  std::optional<GeoPose> pose;
  std::optional<std::string> place_id;
  // nullopt means a high-quality original.
  std::optional<DegradationSpec> degradation;
  // For degraded records: the high-quality image this one was produced from.
  std::filesystem::path source_path;

  bool degraded() const noexcept { return degradation.has_value(); }

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetManifest {
  std::string name;
  Split split = Split::database;
  GroundTruthMode gt_mode;
  std::vector<ImageRecord> records;
  // Free-form provenance, e.g. "encoder" for degraded manifests.
  std::map<std::string, std::string> metadata;

  /// Unique ids, one pose mode across records, gt_mode consistent with it.
  void validate() const;

  /// Pose mode shared by all records; nullopt when records carry no pose
  /// (or the manifest is empty).
  std::optional<PoseMode> pose_mode() const;

  const ImageRecord* find(std::string_view id) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Relative record paths are resolved against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Record paths are written relative to the manifest's directory (using
/// "../" for siblings) unless they share nothing but the filesystem root.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                               const std::string& source_name = "<manifest>");
std::string format_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

}  // namespace loqi
