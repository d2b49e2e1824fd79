#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tailgen/backends.hpp"
#include "tailgen/clock.hpp"
#include "tailgen/config.hpp"
#include "tailgen/dataset.hpp"
#include "tailgen/expansion.hpp"

namespace tailgen {

struct ClassSummary {
  int class_id = -1;
  std::string label;
  int original = 0;
  int captioned = 0;
  int expanded_kept = 0;
  int generated = 0;
  int accepted = 0;
  int rejected = 0;
  std::string status;  // terminal expansion status
};

struct RunSummary {
  std::vector<ClassSummary> classes;
  std::vector<int> stalled_classes;
  std::int64_t total_accepted = 0;
  std::int64_t total_rejected = 0;
  int mixed_emitted = 0;
  BackendTallies tallies;
  std::filesystem::path out_dir;

  /// Deterministic report body (no call tallies, no wall-clock).
  std::string to_text() const;
};

/// Test seams: override the clock or wrap the innermost dispatch backend
/// (e.g. to inject faults mid-run).
struct PipelineHooks {
  ClockPtr clock;
  std::function<BackendPtr(BackendPtr)> wrap_dispatch;
};

/// Execute the full generation run into `out_dir`:
///   ingest -> caption/expand/dedup -> class templates -> image generation
///   -> quality-gated refinement -> (optional) mixed-sample emission.
/// Every stage seals its artifact in the run journal; rerunning over the
/// same directory skips sealed stages. Backend responses are cached under
/// the run's cache dir, so an interrupted stage replays instead of re-paying
/// backend calls.
RunSummary run_pipeline(const PipelineConfig& config, const std::string& manifest_path,
                        const std::filesystem::path& out_dir,
                        const PipelineHooks& hooks = {});

/// Continue an interrupted run from its persisted config + journal + cache.
RunSummary resume_run(const std::filesystem::path& out_dir, const PipelineHooks& hooks = {});

/// Re-emit mixed samples from a finished run's accepted pool with a fresh
/// (count, seed); overwrites the run's mix/ outputs.
RunSummary emit_mix_only(const std::filesystem::path& out_dir, int num_samples,
                         std::uint64_t seed);

/// hex16 FNV-1a of a file's bytes; used for artifact seals.
std::string hash_file(const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace tailgen
