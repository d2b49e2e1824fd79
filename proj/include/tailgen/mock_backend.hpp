#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tailgen/backends.hpp"

namespace tailgen {

/// Knobs for the offline model family. The embedding-side convention couples
/// the generator and embedder: a generated buffer carries a small header
/// (class key, refinement revision, description hash) that the embedder reads
/// back, so an image of class y at revision r scores
///   clamp(embed_base + embed_gain * r, -1, 1)
/// against y's rendered class template and ~0 against other classes.
struct MockBackendConfig {
  std::uint64_t seed = 0;
  double duplicate_rate = 0.0;  // chance an expansion slot re-emits a known line
  double embed_base = 0.5;
  double embed_gain = 0.2;
  int embed_dim = 512;
  int image_size = 24;

  void validate() const;

  bool operator==(const MockBackendConfig&) const = default;
};

class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockBackendConfig config);
  BackendResponse invoke(const BackendRequest& request) override;

  const MockBackendConfig& config() const { return config_; }

 private:
  std::string caption(const BackendRequest& request) const;
  std::vector<std::string> expand(const BackendRequest& request) const;
  std::vector<std::string> dedup(const BackendRequest& request) const;
  std::string summarize(const BackendRequest& request) const;
  std::string refine(const BackendRequest& request) const;
  ImageBuffer generate(const BackendRequest& request) const;
  Embedding embed_image(const BackendRequest& request) const;
  Embedding embed_text(const BackendRequest& request) const;

  MockBackendConfig config_;
};

/// Deterministic filler pattern keyed by (ref, seed); used as the stand-in
/// source for original dataset images when no real files exist.
ImageBuffer procedural_image(std::string_view ref, std::uint64_t seed, int size);

/// The synthetic novel description the mock emits for slot `index` of a
/// class; exposed so tests can predict expansion content.
std::string mock_novel_description(const std::string& label, int index);

}  // namespace tailgen
