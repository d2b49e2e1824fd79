#include "tailgen/cache.hpp"

#include <fstream>
#include <sstream>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"

namespace tailgen {

ResponseCache::ResponseCache(std::filesystem::path dir, bool enabled)
    : dir_(std::move(dir)), enabled_(enabled) {
  if (enabled_) std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<BackendResponse> ResponseCache::lookup(const std::string& key) {
  if (!enabled_) return std::nullopt;
  std::lock_guard<std::mutex> lock(mu_);
  std::ifstream in(entry_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::string checksum_line;
  if (!std::getline(in, checksum_line)) return std::nullopt;
  std::stringstream body;
  body << in.rdbuf();
  std::string json_text = body.str();
  if (!json_text.empty() && json_text.back() == '\n') json_text.pop_back();
  if (checksum_line != to_hex16(fnv1a(json_text))) {
    ++corrupt_entries_;
    return std::nullopt;
  }
  try {
    return response_from_json(json_text);
  } catch (const ValidationError&) {
    ++corrupt_entries_;
    return std::nullopt;
  }
}

void ResponseCache::store(const std::string& key, const BackendResponse& response) {
  if (!enabled_) return;
  std::lock_guard<std::mutex> lock(mu_);
  auto path = entry_path(key);
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    // Verify in-place; only a corrupt entry is replaced.
    std::ifstream in(path, std::ios::binary);
    std::string checksum_line;
    if (in && std::getline(in, checksum_line)) {
      std::stringstream body;
      body << in.rdbuf();
      std::string existing = body.str();
      if (!existing.empty() && existing.back() == '\n') existing.pop_back();
      if (checksum_line == to_hex16(fnv1a(existing))) return;
    }
  }
  std::string json_text = response_to_json(response);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write cache entry: " + tmp.string());
    out << to_hex16(fnv1a(json_text)) << '\n' << json_text << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::int64_t ResponseCache::corrupt_entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return corrupt_entries_;
}

CachingBackend::CachingBackend(BackendPtr inner, ResponseCachePtr cache,
                               BackendStatsPtr stats)
    : inner_(std::move(inner)), cache_(std::move(cache)), stats_(std::move(stats)) {}

BackendResponse CachingBackend::invoke(const BackendRequest& request) {
  std::string key;
  if (cache_ && cache_->enabled()) {
    key = request.idempotency_key();
    if (auto hit = cache_->lookup(key)) {
      if (stats_) stats_->count_cache_hit();
      return *hit;
    }
  }
  BackendResponse resp = inner_->invoke(request);
  if (!key.empty()) cache_->store(key, resp);
  return resp;
}

}  // namespace tailgen
