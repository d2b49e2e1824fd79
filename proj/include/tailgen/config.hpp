#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "tailgen/backends.hpp"
#include "tailgen/http_backend.hpp"
#include "tailgen/mock_backend.hpp"

namespace tailgen {

enum class BackendImpl { Mock, Http };

std::string_view backend_impl_name(BackendImpl impl);
BackendImpl backend_impl_from_name(std::string_view name);

/// Operation slots that can be bound to an implementation independently.
inline constexpr std::string_view kBackendSlots[] = {
    "caption", "expand", "summarize", "refine", "generate", "embed",
};

struct PipelineConfig {
  std::string profile = "imagenet_lt";
  int per_class_cap = 300;       // K_y
  double score_threshold = 0.8;  // acceptance cosine
  int max_cycles = 3;
  int batch_size = 10;
  double mix_alpha = 1.0;
  int num_mix_samples = 0;
  int resolution = 224;
  std::uint64_t seed = 0;
  int worker_width = 8;
  bool cache_enabled = true;
  std::string cache_dir;  // empty: <out>/cache
  bool simulated_clock = true;
  std::string original_source = "procedural";  // procedural | files
  RateLimit image_limit{50, std::chrono::microseconds(60'000'000)};
  RateLimit text_limit{300, std::chrono::microseconds(60'000'000)};
  RetryPolicy retry;
  std::map<std::string, BackendImpl> backends;  // slot -> implementation
  MockBackendConfig mock;
  HttpBackendConfig http;

  PipelineConfig();

  BackendImpl backend_for(std::string_view slot) const;
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

/// Apply one `key = value` assignment; unknown keys and bad values throw.
void set_option(PipelineConfig& config, const std::string& key, const std::string& value);

/// Named presets fixing the per-class cap and acceptance threshold.
void apply_profile(PipelineConfig& config, const std::string& name);

/// Flat `key = value` text, `#` starts a comment. The profile key applies
/// first regardless of position; every other key overrides the preset.
PipelineConfig parse_config_text(std::istream& in);
PipelineConfig load_config(const std::string& path);

/// Fully-resolved dump; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& config);
void save_config(const PipelineConfig& config, const std::string& path);

}  // namespace tailgen
