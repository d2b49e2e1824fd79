#include "tailgen/backends.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tailgen/errors.hpp"
#include "tailgen/hashing.hpp"

namespace tailgen {

namespace {

using nlohmann::json;

constexpr std::string_view kKindNames[kRequestKindCount] = {
    "caption", "expand", "summarize", "refine",
    "generate_image", "embed_image", "embed_text",
};

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  if (i + 1 == data.size()) {
    std::uint32_t v = data[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    int v = b64_value(c);
    if (v < 0) throw ValidationError("invalid base64 payload");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace

std::string_view kind_name(RequestKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

RequestKind kind_from_name(std::string_view name) {
  for (int i = 0; i < kRequestKindCount; ++i) {
    if (kKindNames[i] == name) return static_cast<RequestKind>(i);
  }
  throw ValidationError("unknown backend request kind: " + std::string(name));
}

RateGroup rate_group(RequestKind kind) {
  return kind == RequestKind::GenerateImage ? RateGroup::Image : RateGroup::Text;
}

std::string BackendRequest::idempotency_key() const {
  std::uint64_t h = fnv1a(kind_name(kind));
  h = fnv1a("\x1f", h);
  h = fnv1a(prompt, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(image_ref, h);
  h = fnv1a("\x1f", h);
  h = hash_combine(h, fnv1a_bytes(image_bytes.data(), image_bytes.size()));
  h = fnv1a(text, h);
  h = fnv1a("\x1f", h);
  h = hash_combine(h, seed);
  // Second pass decorrelates keys whose payloads differ only in field order.
  return to_hex16(mix64(h)) + to_hex16(mix64(h ^ 0x9e3779b97f4a7c15ull));
}

double Embedding::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

Embedding Embedding::normalized() const {
  double n = norm();
  if (n == 0.0) throw ValidationError("cannot normalize a zero embedding");
  Embedding out;
  out.values.reserve(values.size());
  for (double v : values) out.values.push_back(v / n);
  return out;
}

double dot(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) {
    throw ValidationError("embedding dimension mismatch: " +
                          std::to_string(a.values.size()) + " vs " +
                          std::to_string(b.values.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ValidationError("cosine similarity undefined for zero vectors");
  }
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

std::string request_to_json(const BackendRequest& req) {
  json payload = json::object();
  if (!req.prompt.empty()) payload["prompt"] = req.prompt;
  if (!req.image_ref.empty()) payload["image_ref"] = req.image_ref;
  if (!req.image_bytes.empty()) payload["image_base64"] = base64_encode(req.image_bytes);
  if (!req.text.empty()) payload["text"] = req.text;
  json j{
      {"kind", kind_name(req.kind)},
      {"payload", payload},
      {"seed", req.seed},
  };
  return j.dump();
}

std::string response_to_json(const BackendResponse& resp) {
  json j = json::object();
  if (!resp.text.empty()) j["text"] = resp.text;
  if (!resp.lines.empty()) j["lines"] = resp.lines;
  if (resp.image.width > 0) {
    j["image_base64"] = base64_encode(encode_ppm(resp.image));
  }
  if (!resp.vector.values.empty()) j["vector"] = resp.vector.values;
  return j.dump();
}

BackendResponse response_from_json(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("malformed backend response JSON");
  }
  BackendResponse resp;
  if (j.contains("text")) resp.text = j.at("text").get<std::string>();
  if (j.contains("lines")) resp.lines = j.at("lines").get<std::vector<std::string>>();
  if (j.contains("image_base64")) {
    resp.image = decode_ppm(base64_decode(j.at("image_base64").get<std::string>()));
  }
  if (j.contains("vector")) {
    resp.vector.values = j.at("vector").get<std::vector<double>>();
  }
  return resp;
}

// --- RateLimiter ----------------------------------------------------------------

RateLimiter::RateLimiter(RateLimit limit, ClockPtr clock,
                         std::function<void(std::chrono::microseconds)> on_admit)
    : limit_(limit), clock_(std::move(clock)), on_admit_(std::move(on_admit)) {
  if (limit_.capacity < 1) throw ValidationError("rate limit capacity must be >= 1");
  if (limit_.window.count() <= 0) throw ValidationError("rate limit window must be positive");
  if (!clock_) throw ValidationError("rate limiter requires a clock");
}

bool RateLimiter::admit_locked(std::chrono::microseconds now) {
  // Admissions at exactly (now - window) have left the window.
  auto cutoff = now - limit_.window;
  while (!log_.empty() && log_.front() <= cutoff) log_.pop_front();
  if (static_cast<int>(log_.size()) >= limit_.capacity) return false;
  log_.push_back(now);
  ++admitted_;
  if (on_admit_) on_admit_(now);
  return true;
}

void RateLimiter::acquire() {
  for (;;) {
    std::chrono::microseconds wait{0};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto now = clock_->now();
      if (admit_locked(now)) return;
      // Earliest time the oldest in-window admission expires.
      wait = log_.front() + limit_.window - now + std::chrono::microseconds(1);
    }
    if (wait.count() < 1) wait = std::chrono::microseconds(1);
    clock_->sleep_for(wait);
  }
}

bool RateLimiter::try_acquire() {
  std::lock_guard<std::mutex> lock(mu_);
  return admit_locked(clock_->now());
}

std::int64_t RateLimiter::admitted() const {
  std::lock_guard<std::mutex> lock(mu_);
  return admitted_;
}

// --- stats ------------------------------------------------------------------

std::int64_t BackendTallies::total_calls() const {
  std::int64_t s = 0;
  for (auto c : calls) s += c;
  return s;
}

BackendTallies BackendStats::snapshot() const {
  BackendTallies t;
  for (std::size_t i = 0; i < calls_.size(); ++i) {
    t.calls[i] = calls_[i].load(std::memory_order_relaxed);
  }
  t.cache_hits = cache_hits_.load(std::memory_order_relaxed);
  t.retries = retries_.load(std::memory_order_relaxed);
  return t;
}

// --- DispatchBackend ----------------------------------------------------------

DispatchBackend::DispatchBackend(std::map<RequestKind, BackendPtr> impls,
                                 BackendStatsPtr stats)
    : impls_(std::move(impls)), stats_(std::move(stats)) {}

BackendResponse DispatchBackend::invoke(const BackendRequest& request) {
  auto it = impls_.find(request.kind);
  if (it == impls_.end()) {
    throw ValidationError("no backend registered for kind: " +
                          std::string(kind_name(request.kind)));
  }
  if (stats_) stats_->count_call(request.kind);
  return it->second->invoke(request);
}

// --- RetryingBackend ----------------------------------------------------------

RetryingBackend::RetryingBackend(BackendPtr inner, RetryPolicy policy, ClockPtr clock,
                                 BackendStatsPtr stats)
    : inner_(std::move(inner)), policy_(policy), clock_(std::move(clock)),
      stats_(std::move(stats)) {
  if (policy_.max_retries < 0) throw ValidationError("max_retries must be >= 0");
}

BackendResponse RetryingBackend::invoke(const BackendRequest& request) {
  std::string last_error;
  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    if (attempt > 0) {
      // Deterministic jitter in [0.5, 1.0] from the request identity and
      // attempt number, so reruns wait identical spans on a simulated clock.
      std::uint64_t h = mix64(fnv1a(request.idempotency_key()) + static_cast<std::uint64_t>(attempt));
      double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
      double scale = 0.5 + 0.5 * unit;
      double exp = static_cast<double>(policy_.base_delay.count()) *
                   static_cast<double>(1ull << std::min(attempt - 1, 40));
      exp = std::min(exp, static_cast<double>(policy_.max_delay.count()));
      auto delay = std::chrono::microseconds(static_cast<std::int64_t>(exp * scale));
      if (delay.count() > 0) clock_->sleep_for(delay);
      if (stats_) stats_->count_retry();
    }
    try {
      return inner_->invoke(request);
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      last_error = e.what();
    }
  }
  throw BackendError("backend call failed after " +
                         std::to_string(policy_.max_retries + 1) +
                         " attempts: " + last_error,
                     /*retryable=*/false);
}

// --- ThrottledBackend ---------------------------------------------------------

ThrottledBackend::ThrottledBackend(BackendPtr inner,
                                   std::shared_ptr<RateLimiter> image_limiter,
                                   std::shared_ptr<RateLimiter> text_limiter)
    : inner_(std::move(inner)), image_limiter_(std::move(image_limiter)),
      text_limiter_(std::move(text_limiter)) {}

BackendResponse ThrottledBackend::invoke(const BackendRequest& request) {
  auto& limiter =
      rate_group(request.kind) == RateGroup::Image ? image_limiter_ : text_limiter_;
  if (limiter) limiter->acquire();
  return inner_->invoke(request);
}

// --- BackendClient --------------------------------------------------------------

std::string BackendClient::caption(const std::string& image_ref,
                                   const std::string& prompt, std::uint64_t seed) {
  BackendRequest req;
  req.kind = RequestKind::Caption;
  req.prompt = prompt;
  req.image_ref = image_ref;
  req.seed = seed;
  return backend_->invoke(req).text;
}

std::vector<std::string> BackendClient::expand(const std::string& prompt,
                                               std::uint64_t seed) {
  BackendRequest req;
  req.kind = RequestKind::Expand;
  req.prompt = prompt;
  req.seed = seed;
  return backend_->invoke(req).lines;
}

std::string BackendClient::summarize(const std::string& prompt, std::uint64_t seed) {
  BackendRequest req;
  req.kind = RequestKind::Summarize;
  req.prompt = prompt;
  req.seed = seed;
  return backend_->invoke(req).text;
}

std::string BackendClient::refine(const std::string& prompt, std::uint64_t seed) {
  BackendRequest req;
  req.kind = RequestKind::Refine;
  req.prompt = prompt;
  req.seed = seed;
  return backend_->invoke(req).text;
}

ImageBuffer BackendClient::generate_image(const std::string& description,
                                          std::uint64_t seed) {
  BackendRequest req;
  req.kind = RequestKind::GenerateImage;
  req.prompt = description;
  req.seed = seed;
  return backend_->invoke(req).image;
}

Embedding BackendClient::embed_image(const ImageBuffer& image) {
  BackendRequest req;
  req.kind = RequestKind::EmbedImage;
  req.image_bytes = encode_ppm(image);
  return backend_->invoke(req).vector;
}

Embedding BackendClient::embed_text(const std::string& text) {
  BackendRequest req;
  req.kind = RequestKind::EmbedText;
  req.text = text;
  return backend_->invoke(req).vector;
}

}  // namespace tailgen
