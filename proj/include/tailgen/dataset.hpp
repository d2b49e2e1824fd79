#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tailgen {

/// One class of the original long-tail dataset. Image locators are opaque
/// strings; nothing in this module opens image files.
struct ClassRecord {
  int class_id = -1;
  std::string label;
  std::vector<std::string> image_refs;

  int original_count() const { return static_cast<int>(image_refs.size()); }

  bool operator==(const ClassRecord& o) const {
    return class_id == o.class_id && label == o.label && image_refs == o.image_refs;
  }
};

struct DatasetManifest {
  std::string name;
  int num_classes = 0;
  std::vector<ClassRecord> classes;  // sorted by class_id, ids exactly 0..num_classes-1

  const ClassRecord& class_by_id(int id) const { return classes.at(static_cast<std::size_t>(id)); }

  bool operator==(const DatasetManifest& o) const {
    return num_classes == o.num_classes && classes == o.classes;
  }
};

/// Class tallies by shot regime plus the imbalance factor max/min.
struct SplitStats {
  int many_count = 0;    // more than 100 images
  int medium_count = 0;  // 20 to 100 images inclusive
  int few_count = 0;     // fewer than 20 images
  double imbalance_factor = 1.0;
};

enum class ShotSplit { Many, Medium, Few };

ShotSplit shot_split(int count);

/// How many new descriptions/images a class needs to reach the cap.
struct GenerationQuota {
  int class_id = -1;
  int target_new = 0;
};

/// Parse a line-delimited manifest: `class_id<TAB>label<TAB>ref1,ref2,...`.
/// An empty third field means zero images. Records are normalized to
/// class_id order; ids must form exactly {0..Y-1}.
DatasetManifest ingest_manifest(std::istream& source, const std::string& name = "manifest");
DatasetManifest load_manifest(const std::string& path);

void serialize_manifest(const DatasetManifest& manifest, std::ostream& out);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

SplitStats split_stats(const DatasetManifest& manifest);

std::vector<GenerationQuota> generation_quota(const DatasetManifest& manifest, int cap);

}  // namespace tailgen
