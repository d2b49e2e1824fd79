#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "tailgen/clock.hpp"
#include "tailgen/image.hpp"

namespace tailgen {

enum class RequestKind {
  Caption,
  Expand,
  Summarize,
  Refine,
  GenerateImage,
  EmbedImage,
  EmbedText,
};
inline constexpr int kRequestKindCount = 7;

std::string_view kind_name(RequestKind kind);
RequestKind kind_from_name(std::string_view name);

/// Rate-limit group: image generation is throttled separately from the
/// text-side operations.
enum class RateGroup { Image, Text };
RateGroup rate_group(RequestKind kind);

struct BackendRequest {
  RequestKind kind = RequestKind::Caption;
  std::string prompt;                     // rendered prompt / t2i description
  std::string image_ref;                  // Caption only
  std::vector<std::uint8_t> image_bytes;  // EmbedImage: PPM-encoded buffer
  std::string text;                       // EmbedText
  std::uint64_t seed = 0;

  /// Content hash of (kind, payload, seed); stable across runs.
  std::string idempotency_key() const;
};

struct Embedding {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  double norm() const;
  Embedding normalized() const;
};

double dot(const Embedding& a, const Embedding& b);
/// Cosine of the angle between raw vectors; invariant under positive scaling.
double cosine_similarity(const Embedding& a, const Embedding& b);

struct BackendResponse {
  std::string text;
  std::vector<std::string> lines;
  ImageBuffer image;
  Embedding vector;
};

/// JSON envelope shared by the HTTP adapter and the response cache:
/// `{kind, payload, seed}` -> `{text | lines | image_base64 | vector}`.
std::string request_to_json(const BackendRequest& req);
std::string response_to_json(const BackendResponse& resp);
BackendResponse response_from_json(const std::string& json_text);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse invoke(const BackendRequest& request) = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

// --- throttling ---------------------------------------------------------------

struct RateLimit {
  int capacity = 1;
  std::chrono::microseconds window{60'000'000};

  bool operator==(const RateLimit&) const = default;
};

/// Sliding-log limiter: at most `capacity` admissions inside any window of
/// the configured length, on the injected clock's timeline.
class RateLimiter {
 public:
  /// `on_admit` (optional) observes each admission timestamp, in admission
  /// order, under the limiter's lock.
  RateLimiter(RateLimit limit, ClockPtr clock,
              std::function<void(std::chrono::microseconds)> on_admit = {});

  /// Block (sleeping on the clock) until admission is legal, then admit.
  void acquire();
  /// Admit only if currently legal.
  bool try_acquire();

  const RateLimit& limit() const { return limit_; }
  std::int64_t admitted() const;

 private:
  bool admit_locked(std::chrono::microseconds now);

  RateLimit limit_;
  ClockPtr clock_;
  std::function<void(std::chrono::microseconds)> on_admit_;
  mutable std::mutex mu_;
  std::deque<std::chrono::microseconds> log_;
  std::int64_t admitted_ = 0;
};

// --- retry --------------------------------------------------------------------

struct RetryPolicy {
  int max_retries = 3;  // extra attempts after the first
  std::chrono::microseconds base_delay{100'000};
  std::chrono::microseconds max_delay{10'000'000};

  bool operator==(const RetryPolicy&) const = default;
};

// --- call accounting ----------------------------------------------------------

struct BackendTallies {
  std::array<std::int64_t, kRequestKindCount> calls{};
  std::int64_t cache_hits = 0;
  std::int64_t retries = 0;

  std::int64_t total_calls() const;
  std::int64_t for_kind(RequestKind kind) const {
    return calls[static_cast<std::size_t>(kind)];
  }
};

class BackendStats {
 public:
  void count_call(RequestKind kind) {
    calls_[static_cast<std::size_t>(kind)].fetch_add(1, std::memory_order_relaxed);
  }
  void count_cache_hit() { cache_hits_.fetch_add(1, std::memory_order_relaxed); }
  void count_retry() { retries_.fetch_add(1, std::memory_order_relaxed); }

  BackendTallies snapshot() const;

 private:
  std::array<std::atomic<std::int64_t>, kRequestKindCount> calls_{};
  std::atomic<std::int64_t> cache_hits_{0};
  std::atomic<std::int64_t> retries_{0};
};

using BackendStatsPtr = std::shared_ptr<BackendStats>;

// --- stack layers -------------------------------------------------------------

/// Routes each request to the implementation registered for its kind and
/// counts base invocations.
class DispatchBackend final : public Backend {
 public:
  DispatchBackend(std::map<RequestKind, BackendPtr> impls, BackendStatsPtr stats);
  BackendResponse invoke(const BackendRequest& request) override;

 private:
  std::map<RequestKind, BackendPtr> impls_;
  BackendStatsPtr stats_;
};

/// Exponential backoff with deterministic per-request jitter. Exhaustion
/// surfaces exactly one non-retryable BackendError.
class RetryingBackend final : public Backend {
 public:
  RetryingBackend(BackendPtr inner, RetryPolicy policy, ClockPtr clock, BackendStatsPtr stats);
  BackendResponse invoke(const BackendRequest& request) override;

 private:
  BackendPtr inner_;
  RetryPolicy policy_;
  ClockPtr clock_;
  BackendStatsPtr stats_;
};

class ThrottledBackend final : public Backend {
 public:
  ThrottledBackend(BackendPtr inner, std::shared_ptr<RateLimiter> image_limiter,
                   std::shared_ptr<RateLimiter> text_limiter);
  BackendResponse invoke(const BackendRequest& request) override;

 private:
  BackendPtr inner_;
  std::shared_ptr<RateLimiter> image_limiter_;
  std::shared_ptr<RateLimiter> text_limiter_;
};

// --- typed facade -------------------------------------------------------------

/// Convenience API over a backend stack; builds requests and unpacks the
/// response field each operation uses.
class BackendClient {
 public:
  explicit BackendClient(BackendPtr backend) : backend_(std::move(backend)) {}

  std::string caption(const std::string& image_ref, const std::string& prompt,
                      std::uint64_t seed);
  std::vector<std::string> expand(const std::string& prompt, std::uint64_t seed);
  std::string summarize(const std::string& prompt, std::uint64_t seed);
  std::string refine(const std::string& prompt, std::uint64_t seed);
  ImageBuffer generate_image(const std::string& description, std::uint64_t seed);
  Embedding embed_image(const ImageBuffer& image);
  Embedding embed_text(const std::string& text);

  Backend& backend() { return *backend_; }

 private:
  BackendPtr backend_;
};

}  // namespace tailgen
