#include "tailgen/balance_mix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"

namespace tailgen {

GeneratedPool pool_from_accepted(const std::vector<GeneratedImage>& images) {
  GeneratedPool pool;
  for (const auto& img : images) {
    if (img.status != ImageStatus::Accepted) continue;
    pool.items.push_back({img.image_id, img.class_id, img.buffer_ref});
  }
  return pool;
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
  if (n < 1) throw ValidationError("uniform_int needs n >= 1");
  // Multiply-shift; bias is ~n/2^64, far below anything our tests resolve.
  return static_cast<int>((static_cast<unsigned __int128>(engine_()) *
                           static_cast<unsigned __int128>(n)) >>
                          64);
}

double Rng::gamma(double alpha) {
  std::gamma_distribution<double> dist(alpha, 1.0);
  return dist(engine_);
}

std::pair<std::string, int> balanced_sample_original(const DatasetManifest& manifest,
                                                     Rng& rng) {
  if (manifest.classes.empty()) throw ValidationError("manifest has no classes");
  int cls = rng.uniform_int(manifest.num_classes);
  const auto& rec = manifest.classes[static_cast<std::size_t>(cls)];
  if (rec.image_refs.empty()) {
    throw ValidationError("class " + std::to_string(cls) +
                          " has no original images to sample");
  }
  int idx = rng.uniform_int(rec.original_count());
  return {rec.image_refs[static_cast<std::size_t>(idx)], cls};
}

const GeneratedPoolItem& sample_generated(const GeneratedPool& pool, Rng& rng) {
  if (pool.items.empty()) throw ValidationError("generated pool is empty");
  return pool.items[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(pool.size())))];
}

double draw_lambda(Rng& rng, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("mix alpha must be > 0");
  double a = rng.gamma(alpha);
  double b = rng.gamma(alpha);
  if (a + b <= 0.0) return 0.5;  // both underflowed (tiny alpha)
  return std::clamp(a / (a + b), 0.0, 1.0);
}

MixedSample mix(const ImageBuffer& x_orig, int y_orig, const ImageBuffer& x_gen, int y_gen,
                double lam, int num_classes) {
  if (x_orig.width != x_gen.width || x_orig.height != x_gen.height) {
    throw std::logic_error("mix inputs disagree on shape: " +
                           std::to_string(x_orig.width) + "x" + std::to_string(x_orig.height) +
                           " vs " + std::to_string(x_gen.width) + "x" +
                           std::to_string(x_gen.height));
  }
  if (num_classes < 1 || y_orig < 0 || y_orig >= num_classes || y_gen < 0 ||
      y_gen >= num_classes) {
    throw ValidationError("mix labels out of range");
  }
  if (!(lam >= 0.0 && lam <= 1.0)) throw ValidationError("lambda must be in [0, 1]");

  MixedSample s;
  s.lam = lam;
  s.class_original = y_orig;
  s.class_generated = y_gen;

  s.pixels.width = x_orig.width;
  s.pixels.height = x_orig.height;
  s.pixels.data.resize(x_orig.data.size());
  double inv = 1.0 - lam;
  for (std::size_t i = 0; i < x_orig.data.size(); ++i) {
    s.pixels.data[i] = lam * x_orig.data[i] + inv * x_gen.data[i];
  }

  s.soft_label.assign(static_cast<std::size_t>(num_classes), 0.0);
  if (y_orig == y_gen) {
    s.soft_label[static_cast<std::size_t>(y_orig)] = 1.0;
  } else {
    s.soft_label[static_cast<std::size_t>(y_orig)] = lam;
    s.soft_label[static_cast<std::size_t>(y_gen)] = inv;
  }
  return s;
}

void validate_mix_inputs(const DatasetManifest& manifest, const GeneratedPool& pool) {
  if (pool.items.empty()) {
    throw ValidationError("cannot emit mixed samples: generated pool is empty");
  }
  for (const auto& rec : manifest.classes) {
    if (rec.image_refs.empty()) {
      throw ValidationError("cannot emit mixed samples: class " +
                            std::to_string(rec.class_id) + " has no original images");
    }
  }
  for (const auto& item : pool.items) {
    if (item.class_id < 0 || item.class_id >= manifest.num_classes) {
      throw ValidationError("generated pool references unknown class " +
                            std::to_string(item.class_id));
    }
  }
}

void emit_batches(const DatasetManifest& manifest, const GeneratedPool& pool,
                  const MixConfig& cfg, const ImageProvider& original_images,
                  const ImageProvider& generated_images, const SampleSink& sink) {
  if (cfg.num_samples < 0) throw ValidationError("num_samples must be >= 0");
  if (cfg.resolution < 1) throw ValidationError("mix resolution must be >= 1");
  if (!(cfg.alpha > 0.0)) throw ValidationError("mix alpha must be > 0");
  validate_mix_inputs(manifest, pool);

  for (int i = 0; i < cfg.num_samples; ++i) {
    Rng rng(derive_seed(cfg.seed, "mix", static_cast<std::uint64_t>(i), 0));
    auto [orig_ref, orig_class] = balanced_sample_original(manifest, rng);
    const GeneratedPoolItem& gen = sample_generated(pool, rng);
    double lam = draw_lambda(rng, cfg.alpha);

    ImageBuffer xo = resize_to(original_images(orig_ref), cfg.resolution);
    ImageBuffer xg = resize_to(generated_images(gen.buffer_ref), cfg.resolution);
    MixedSample s = mix(xo, orig_class, xg, gen.class_id, lam, manifest.num_classes);

    char id[32];
    std::snprintf(id, sizeof id, "mix-%06d", i);
    s.sample_id = id;
    s.src_original = orig_ref;
    s.src_generated = gen.image_id;
    sink(s);
  }
}

std::string format_mix_label_row(const MixedSample& s) {
  char buf[64];
  std::string row = s.sample_id;
  std::snprintf(buf, sizeof buf, "%.6f", s.lam);
  row += '\t';
  row += buf;
  std::snprintf(buf, sizeof buf, "%d:%.6f", s.class_original, s.lam);
  row += '\t';
  row += buf;
  std::snprintf(buf, sizeof buf, "%d:%.6f", s.class_generated, 1.0 - s.lam);
  row += '\t';
  row += buf;
  row += '\t';
  row += s.src_original;
  row += '\t';
  row += s.src_generated;
  return row;
}

}  // namespace tailgen
