#include "tailgen/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"
#include "tailgen/parallel.hpp"

namespace tailgen {

namespace {

constexpr std::string_view kImageStatusNames[] = {"pending", "accepted", "rejected"};

}  // namespace

std::string_view image_status_name(ImageStatus status) {
  return kImageStatusNames[static_cast<std::size_t>(status)];
}

ImageStatus image_status_from_name(std::string_view name) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (kImageStatusNames[i] == name) return static_cast<ImageStatus>(i);
  }
  throw ValidationError("unknown image status: " + std::string(name));
}

std::string make_image_id(int class_id, int item_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "g%04dn%05d", class_id, item_index);
  return buf;
}

ImageStore::ImageStore(std::filesystem::path root, std::string subdir)
    : root_(std::move(root)), subdir_(std::move(subdir)) {
  std::filesystem::create_directories(root_ / subdir_);
}

std::string ImageStore::save(const std::string& image_id, int cycle,
                             const ImageBuffer& buffer) {
  std::string name = image_id + ".c" + std::to_string(cycle) + ".ppm";
  std::string ref = subdir_ + "/" + name;
  write_ppm((root_ / subdir_ / name).string(), buffer);
  return ref;
}

ImageBuffer ImageStore::load(const std::string& ref) const {
  return read_ppm((root_ / ref).string());
}

bool ImageStore::contains(const std::string& ref) const {
  std::error_code ec;
  return std::filesystem::exists(root_ / ref, ec);
}

double score_image(const ImageBuffer& buffer, const ClassFeatureTemplate& anchor,
                   BackendClient& client) {
  if (anchor.rendered.empty()) throw ValidationError("anchor template is empty");
  Embedding img = client.embed_image(buffer).normalized();
  Embedding txt = client.embed_text(anchor.rendered).normalized();
  return std::clamp(dot(img, txt), -1.0, 1.0);
}

EvalOutcome evaluate_and_refine(GeneratedImage image, const ClassFeatureTemplate& anchor,
                                const std::string& label, BackendClient& client,
                                const EvalConfig& cfg, ImageStore& store,
                                const EventSink& events) {
  if (cfg.max_cycles < 1) throw ValidationError("max_cycles must be >= 1");
  if (image.buffer_ref.empty()) {
    throw ValidationError("image " + image.image_id + " has no buffer to evaluate");
  }

  EvalOutcome out;
  ImageBuffer buffer = store.load(image.buffer_ref);
  bool fallback_cycle = false;

  for (int cycle = image.cycle; cycle <= cfg.max_cycles; ++cycle) {
    double score = score_image(buffer, anchor, client);
    image.cycle = cycle;
    image.last_score = score;
    bool pass = score >= cfg.score_threshold;
    out.records.push_back({image.image_id, cycle, score, pass, fallback_cycle});
    fallback_cycle = false;

    if (pass) {
      image.status = ImageStatus::Accepted;
      break;
    }
    if (cycle == cfg.max_cycles) {
      image.status = ImageStatus::Rejected;
      break;
    }

    // Refine the description; a reply that fails to parse gets one re-ask,
    // after which the same text is regenerated under a fresh seed.
    PromptContext ctx;
    ctx.label = label;
    ctx.target = &image.description;
    std::string prompt = render_prompt(PromptKind::RefineDescription, ctx);
    bool refined = false;
    for (int attempt = 0; attempt < 2 && !refined; ++attempt) {
      std::uint64_t seed = derive_seed(cfg.run_seed, attempt == 0 ? "refine" : "refine.retry",
                                       fnv1a(image.image_id), static_cast<std::uint64_t>(cycle));
      std::string text = client.refine(prompt, seed);
      try {
        Description next = parse_template1(text, label);
        next.class_id = image.class_id;
        next.origin = DescriptionOrigin::Refined;
        next.revision = image.description.revision + 1;
        image.description = std::move(next);
        refined = true;
      } catch (const ParseError& e) {
        emit_event(events, "eval", image.class_id, "refine_parse_failure",
                   image.image_id + ": " + e.what());
      }
    }
    if (!refined) {
      fallback_cycle = true;
      emit_event(events, "eval", image.class_id, "fresh_seed_regen", image.image_id);
    }

    std::uint64_t regen_seed = derive_seed(fnv1a(image.description.raw_text), "regen",
                                           static_cast<std::uint64_t>(cycle), 0);
    buffer = client.generate_image(image.description.raw_text, regen_seed);
    image.buffer_ref = store.save(image.image_id, cycle + 1, buffer);
  }

  out.image = std::move(image);
  return out;
}

EvalBatchResult run_eval_batch(std::vector<GeneratedImage> pending,
                               const std::map<int, ClassFeatureTemplate>& anchors,
                               const DatasetManifest& manifest, BackendClient& client,
                               const EvalConfig& cfg, ImageStore& store, int worker_width,
                               const EventSink& events) {
  if (worker_width < 1) throw ValidationError("worker width must be >= 1");

  std::sort(pending.begin(), pending.end(),
            [](const GeneratedImage& a, const GeneratedImage& b) {
              if (a.class_id != b.class_id) return a.class_id < b.class_id;
              return a.image_id < b.image_id;
            });

  std::vector<EvalOutcome> outcomes(pending.size());
  parallel_for(pending.size(), worker_width, [&](std::size_t i) {
    const GeneratedImage& img = pending[i];
    auto it = anchors.find(img.class_id);
    if (it == anchors.end()) {
      throw ValidationError("no anchor template for class " + std::to_string(img.class_id));
    }
    const std::string& label =
        manifest.classes.at(static_cast<std::size_t>(img.class_id)).label;
    outcomes[i] = evaluate_and_refine(pending[i], it->second, label, client, cfg, store,
                                      events);
  });

  EvalBatchResult result;
  result.images.reserve(outcomes.size());
  for (auto& outcome : outcomes) {
    result.images.push_back(std::move(outcome.image));
    for (auto& rec : outcome.records) result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace tailgen
