#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "tailgen/backends.hpp"

namespace tailgen {

struct HttpReply {
  int status = 0;
  std::string body;
};

/// POSTs one JSON envelope and returns the raw reply; swappable so tests can
/// exercise the adapter without sockets.
using HttpTransport = std::function<HttpReply(const std::string& body)>;

struct HttpBackendConfig {
  std::string endpoint;  // base URL, e.g. http://host:8080
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{30'000};

  /// Fill endpoint/api_key from TAILGEN_ENDPOINT / TAILGEN_API_KEY when unset.
  void apply_environment();

  bool operator==(const HttpBackendConfig&) const = default;
};

/// Serializes requests as `{kind, payload, seed}`, parses the response union
/// (`text` | `lines` | `image_base64` | `vector`), and maps transport status
/// to retryable vs hard errors (429/408/5xx retry; other 4xx do not).
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  HttpBackend(HttpBackendConfig config, HttpTransport transport);

  BackendResponse invoke(const BackendRequest& request) override;

 private:
  HttpBackendConfig config_;
  HttpTransport transport_;
};

}  // namespace tailgen
