#include "tailgen/http_backend.hpp"

#include <cstdlib>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

#include "tailgen/errors.hpp"

namespace tailgen {

namespace {

constexpr const char* kInvokePath = "/invoke";

HttpTransport make_real_transport(const HttpBackendConfig& config) {
  return [config](const std::string& body) -> HttpReply {
    httplib::Client client(config.endpoint);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    httplib::Headers headers;
    if (!config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config.api_key);
    }
    auto res = client.Post(kInvokePath, headers, body, "application/json");
    if (!res) {
      throw BackendError("transport failure: " + httplib::to_string(res.error()),
                         /*retryable=*/true);
    }
    return HttpReply{res->status, res->body};
  };
}

}  // namespace

void HttpBackendConfig::apply_environment() {
  if (endpoint.empty()) {
    if (const char* ep = std::getenv("TAILGEN_ENDPOINT")) endpoint = ep;
  }
  if (api_key.empty()) {
    if (const char* key = std::getenv("TAILGEN_API_KEY")) api_key = key;
  }
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  config_.apply_environment();
  if (config_.endpoint.empty()) {
    throw ValidationError(
        "http backend needs an endpoint (config http.endpoint or TAILGEN_ENDPOINT)");
  }
  transport_ = make_real_transport(config_);
}

HttpBackend::HttpBackend(HttpBackendConfig config, HttpTransport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) throw ValidationError("http backend needs a transport");
}

BackendResponse HttpBackend::invoke(const BackendRequest& request) {
  HttpReply reply = transport_(request_to_json(request));
  if (reply.status >= 200 && reply.status < 300) {
    try {
      return response_from_json(reply.body);
    } catch (const ValidationError& e) {
      throw BackendError(std::string("unusable backend reply: ") + e.what(),
                         /*retryable=*/false, reply.status);
    }
  }
  bool retryable = reply.status == 429 || reply.status == 408 || reply.status >= 500;
  throw BackendError("backend returned HTTP " + std::to_string(reply.status),
                     retryable, reply.status);
}

}  // namespace tailgen
