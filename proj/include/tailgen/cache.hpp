#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "tailgen/backends.hpp"

namespace tailgen {

/// Content-addressed, append-only store of backend responses. One file per
/// key: a checksum line followed by the response JSON. A checksum mismatch is
/// treated as a miss (the entry is rewritten on the next store), never as an
/// error, so a torn write cannot wedge a run.
class ResponseCache {
 public:
  ResponseCache(std::filesystem::path dir, bool enabled);

  std::optional<BackendResponse> lookup(const std::string& key);
  void store(const std::string& key, const BackendResponse& response);

  bool enabled() const { return enabled_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::int64_t corrupt_entries() const;

 private:
  std::filesystem::path entry_path(const std::string& key) const;

  std::filesystem::path dir_;
  bool enabled_;
  mutable std::mutex mu_;
  std::int64_t corrupt_entries_ = 0;
};

using ResponseCachePtr = std::shared_ptr<ResponseCache>;

/// Outermost stack layer: replays hits without touching the rate limiter or
/// the base backend; stores every fresh response before returning it.
class CachingBackend final : public Backend {
 public:
  CachingBackend(BackendPtr inner, ResponseCachePtr cache, BackendStatsPtr stats);
  BackendResponse invoke(const BackendRequest& request) override;

 private:
  BackendPtr inner_;
  ResponseCachePtr cache_;
  BackendStatsPtr stats_;
};

}  // namespace tailgen
