#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tailgen/backends.hpp"
#include "tailgen/dataset.hpp"
#include "tailgen/expansion.hpp"
#include "tailgen/templates.hpp"

namespace tailgen {

enum class ImageStatus { Pending, Accepted, Rejected };

std::string_view image_status_name(ImageStatus status);
ImageStatus image_status_from_name(std::string_view name);

std::string make_image_id(int class_id, int item_index);

/// One synthesized image moving through the quality gate. `description` is
/// the text that produced the CURRENT buffer (it advances as refinement
/// rewrites it); `cycle` counts scoring rounds, starting at 1.
struct GeneratedImage {
  std::string image_id;
  int class_id = -1;
  Description description;
  std::string buffer_ref;
  int cycle = 1;
  ImageStatus status = ImageStatus::Pending;
  double last_score = 0.0;
};

struct EvalRecord {
  std::string image_id;
  int cycle = 0;
  double score = 0.0;
  bool pass = false;
  // True when this cycle scored a same-description regeneration (refinement
  // reply never parsed, so only the generation seed was refreshed).
  bool fresh_seed_fallback = false;
};

struct EvalConfig {
  double score_threshold = 0.8;  // accept when cosine >= this
  int max_cycles = 3;
  std::uint64_t run_seed = 0;
};

/// Saves image buffers under `<root>/<subdir>/` and hands out refs relative
/// to the root, so persisted refs stay valid for any reader of the run dir.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root, std::string subdir = "images");

  std::string save(const std::string& image_id, int cycle, const ImageBuffer& buffer);
  ImageBuffer load(const std::string& ref) const;
  bool contains(const std::string& ref) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::string subdir_;
};

/// Cosine between the image's embedding and the class anchor sentence's
/// embedding, both normalized; clamped to [-1, 1].
double score_image(const ImageBuffer& buffer, const ClassFeatureTemplate& anchor,
                   BackendClient& client);

struct EvalOutcome {
  GeneratedImage image;  // terminal: Accepted or Rejected
  std::vector<EvalRecord> records;
};

/// Score/refine/regenerate loop for one image (Eq. 2 gate): accept at
/// cosine >= threshold, otherwise refine the description (one re-ask on a
/// malformed reply, then fresh-seed regeneration of the same text) and
/// regenerate, for at most max_cycles scoring rounds.
EvalOutcome evaluate_and_refine(GeneratedImage image, const ClassFeatureTemplate& anchor,
                                const std::string& label, BackendClient& client,
                                const EvalConfig& cfg, ImageStore& store,
                                const EventSink& events = {});

struct EvalBatchResult {
  std::vector<GeneratedImage> images;  // ordered by (class_id, image_id)
  std::vector<EvalRecord> records;     // grouped per image, cycles ascending
};

/// Evaluate a batch across a worker pool. Output order is canonical and
/// independent of scheduling.
EvalBatchResult run_eval_batch(std::vector<GeneratedImage> pending,
                               const std::map<int, ClassFeatureTemplate>& anchors,
                               const DatasetManifest& manifest, BackendClient& client,
                               const EvalConfig& cfg, ImageStore& store, int worker_width,
                               const EventSink& events = {});

}  // namespace tailgen
