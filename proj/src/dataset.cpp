#include "tailgen/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "tailgen/errors.hpp"

namespace tailgen {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    if (p == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
  return out;
}

}  // namespace

ShotSplit shot_split(int count) {
  if (count > 100) return ShotSplit::Many;
  if (count >= 20) return ShotSplit::Medium;
  return ShotSplit::Few;
}

DatasetManifest ingest_manifest(std::istream& source, const std::string& name) {
  DatasetManifest manifest;
  manifest.name = name;

  std::string line;
  int line_no = 0;
  std::unordered_set<int> seen_ids;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError("manifest line " + std::to_string(line_no) +
                           ": expected 3 tab-separated fields, got " +
                           std::to_string(fields.size()),
                       line, line_no);
    }

    ClassRecord rec;
    try {
      std::size_t used = 0;
      rec.class_id = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": bad class_id '" +
                           fields[0] + "'",
                       line, line_no);
    }
    if (rec.class_id < 0) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": negative class_id", line,
                       line_no);
    }
    rec.label = fields[1];
    if (rec.label.empty()) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": empty label", line, line_no);
    }
    // Labels are embedded as "[label]" in descriptions and parsed back by
    // scanning to the first ']', so a ']' inside a label cannot round-trip.
    if (rec.label.find(']') != std::string::npos) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": label contains ']'", line,
                       line_no);
    }
    if (!fields[2].empty()) {
      rec.image_refs = split(fields[2], ',');
      for (const auto& ref : rec.image_refs) {
        if (ref.empty()) {
          throw ParseError("manifest line " + std::to_string(line_no) + ": empty image ref", line,
                           line_no);
        }
      }
    }

    if (!seen_ids.insert(rec.class_id).second) {
      throw ValidationError("duplicate class_id " + std::to_string(rec.class_id) +
                            " at manifest line " + std::to_string(line_no));
    }
    manifest.classes.push_back(std::move(rec));
  }

  if (manifest.classes.empty()) throw ValidationError("manifest has no classes");

  std::sort(manifest.classes.begin(), manifest.classes.end(),
            [](const ClassRecord& a, const ClassRecord& b) { return a.class_id < b.class_id; });
  manifest.num_classes = static_cast<int>(manifest.classes.size());
  for (int i = 0; i < manifest.num_classes; ++i) {
    if (manifest.classes[static_cast<std::size_t>(i)].class_id != i) {
      throw ValidationError("class_ids must form 0.." + std::to_string(manifest.num_classes - 1) +
                            "; missing id " + std::to_string(i));
    }
  }
  return manifest;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest: " + path);
  std::string name = path;
  auto slash = name.find_last_of("/\\");
  if (slash != std::string::npos) name = name.substr(slash + 1);
  auto dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return ingest_manifest(in, name);
}

void serialize_manifest(const DatasetManifest& manifest, std::ostream& out) {
  for (const auto& rec : manifest.classes) {
    out << rec.class_id << '\t' << rec.label << '\t';
    for (std::size_t i = 0; i < rec.image_refs.size(); ++i) {
      if (i) out << ',';
      out << rec.image_refs[i];
    }
    out << '\n';
  }
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open for write: " + path);
  serialize_manifest(manifest, out);
}

SplitStats split_stats(const DatasetManifest& manifest) {
  SplitStats stats;
  int min_count = std::numeric_limits<int>::max();
  int max_count = 0;
  for (const auto& rec : manifest.classes) {
    int n = rec.original_count();
    switch (shot_split(n)) {
      case ShotSplit::Many: ++stats.many_count; break;
      case ShotSplit::Medium: ++stats.medium_count; break;
      case ShotSplit::Few: ++stats.few_count; break;
    }
    min_count = std::min(min_count, n);
    max_count = std::max(max_count, n);
  }
  if (min_count <= 0) {
    stats.imbalance_factor =
        max_count == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    stats.imbalance_factor = static_cast<double>(max_count) / min_count;
  }
  return stats;
}

std::vector<GenerationQuota> generation_quota(const DatasetManifest& manifest, int cap) {
  if (cap < 1) throw ValidationError("per-class cap must be >= 1");
  std::vector<GenerationQuota> quotas;
  quotas.reserve(manifest.classes.size());
  for (const auto& rec : manifest.classes) {
    quotas.push_back({rec.class_id, std::max(0, cap - rec.original_count())});
  }
  return quotas;
}

}  // namespace tailgen
