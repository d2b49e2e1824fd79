#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tailgen/dataset.hpp"
#include "tailgen/evaluation.hpp"
#include "tailgen/image.hpp"

namespace tailgen {

struct GeneratedPoolItem {
  std::string image_id;
  int class_id = -1;
  std::string buffer_ref;
};

/// Flat pool of accepted synthesized images; draws are item-uniform.
struct GeneratedPool {
  std::vector<GeneratedPoolItem> items;

  std::size_t size() const { return items.size(); }
};

GeneratedPool pool_from_accepted(const std::vector<GeneratedImage>& images);

/// Deterministic RNG wrapper; one instance per emitted sample so draw order
/// never depends on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  /// Uniform integer in [0, n).
  int uniform_int(int n);
  double gamma(double alpha);

 private:
  std::mt19937_64 engine_;
};

/// Class-balanced draw from the originals: first a uniform class, then a
/// uniform image within it. Returns (image_ref, class_id).
std::pair<std::string, int> balanced_sample_original(const DatasetManifest& manifest,
                                                     Rng& rng);

const GeneratedPoolItem& sample_generated(const GeneratedPool& pool, Rng& rng);

/// lambda ~ Beta(alpha, alpha) via two gamma draws, clamped into [0, 1].
double draw_lambda(Rng& rng, double alpha);

struct MixedSample {
  std::string sample_id;
  ImageBuffer pixels;
  std::vector<double> soft_label;  // length = num classes, sums to 1
  double lam = 1.0;
  int class_original = -1;
  int class_generated = -1;
  std::string src_original;
  std::string src_generated;
};

/// Pixel- and label-space convex blend:
///   x = lam * x_orig + (1 - lam) * x_gen
///   q = lam * onehot(y_orig) + (1 - lam) * onehot(y_gen)
/// Equal class ids produce an exact one-hot label. Dimension mismatch is a
/// caller bug and throws std::logic_error.
MixedSample mix(const ImageBuffer& x_orig, int y_orig, const ImageBuffer& x_gen, int y_gen,
                double lam, int num_classes);

struct MixConfig {
  int num_samples = 0;
  double alpha = 1.0;
  int resolution = 224;  // both sides are resized to this square before mixing
  std::uint64_t seed = 0;
};

using ImageProvider = std::function<ImageBuffer(const std::string& ref)>;
using SampleSink = std::function<void(const MixedSample&)>;

/// Fail-fast checks run before any sampling: every class needs at least one
/// original image and the pool must be non-empty.
void validate_mix_inputs(const DatasetManifest& manifest, const GeneratedPool& pool);

/// Emit `num_samples` mixed samples. Each sample's draws come from its own
/// RNG seeded by (seed, index), so emission is order-independent and any
/// index can be reproduced in isolation.
void emit_batches(const DatasetManifest& manifest, const GeneratedPool& pool,
                  const MixConfig& cfg, const ImageProvider& original_images,
                  const ImageProvider& generated_images, const SampleSink& sink);

std::string format_mix_label_row(const MixedSample& sample);

}  // namespace tailgen
