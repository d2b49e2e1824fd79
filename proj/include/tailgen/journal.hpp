#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tailgen/clock.hpp"

namespace tailgen {

struct JournalEvent {
  std::int64_t seq = 0;
  std::int64_t time_us = 0;
  std::string stage;
  std::string entity;        // "class:12", "image:g0003n00007", or "-"
  std::string outcome;       // "sealed", "stalled", "parse_failure", ...
  std::string payload_hash;  // artifact hash for seals, "-" otherwise
};

/// Append-only, hash-chained TSV event log. Each line ends with a chain value
/// folding the previous chain and the line's own fields, so any edit to an
/// already-written line is detected on reload.
class RunJournal {
 public:
  /// Creates the file if absent; otherwise verifies the whole chain and
  /// resumes appending after the last good line. Throws IntegrityError
  /// naming the first bad line on tamper or truncation damage.
  static RunJournal open(const std::filesystem::path& path, ClockPtr clock);

  void append(const std::string& stage, const std::string& entity,
              const std::string& outcome, const std::string& payload_hash = "-");

  /// Records `stage` as finished with the given artifact hash.
  void seal_stage(const std::string& stage, const std::string& artifact_hash);
  /// Hash from the most recent seal of `stage`, or empty if never sealed.
  std::string sealed_hash(const std::string& stage) const;
  bool stage_sealed(const std::string& stage) const { return !sealed_hash(stage).empty(); }

  const std::vector<JournalEvent>& events() const { return events_; }
  const std::filesystem::path& path() const { return path_; }

  RunJournal(RunJournal&&) = default;

 private:
  RunJournal(std::filesystem::path path, ClockPtr clock);

  std::filesystem::path path_;
  ClockPtr clock_;
  std::ofstream out_;
  std::unique_ptr<std::mutex> mu_;
  std::vector<JournalEvent> events_;
  std::string chain_;
  std::int64_t next_seq_ = 0;
};

}  // namespace tailgen
