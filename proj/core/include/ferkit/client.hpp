#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ferkit {

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  std::string image;             // raw bytes; empty for text-only stages
  std::string image_media_type = "image/jpeg";
  double temperature = 0.0;
  int max_output_tokens = 2048;  // reasoning traces run long; keep generous
};

struct ModelResponse {
  std::string request_digest;
  std::string text;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  int attempt_count = 0;
};

struct ClientConfig {
  std::string endpoint;               // e.g. http://host:port/v1/chat/completions
  std::string api_key_env = "";      // name of the env var holding the key; never logged
  int max_in_flight = 8;
  int retry_budget = 3;               // at most retry_budget + 1 attempts
  int backoff_base_ms = 250;
  int backoff_ceiling_ms = 8000;
  std::string cache_dir;              // empty disables caching
  int timeout_sec = 120;
};

// Identity hash over (model, system, user, image bytes, temperature),
// length-prefixed per field so concatenations cannot collide.
std::string request_digest(const ChatRequest& req);

// SHA-256 hex of arbitrary bytes.
std::string sha256_hex(std::string_view data);

// Wire-format seam. The default speaks the common chat-completion JSON
// dialect with a base64 data URL for the image; other endpoints get their
// own adapter instead of leaking vendor quirks into callers.
class WireAdapter {
 public:
  virtual ~WireAdapter() = default;
  virtual std::string request_body(const ChatRequest& req) const;
  // Extracts the assistant text; throws MalformedResponse.
  virtual std::string parse_response(const std::string& body) const;
};

const WireAdapter& default_adapter();

// Cache lookup, then HTTP with retries on 429/5xx/timeout (exponential
// backoff + jitter). 401/403 raise AuthError without retry. Successful
// responses are written to the cache atomically.
ModelResponse complete(const ChatRequest& req, const ClientConfig& cfg,
                       const WireAdapter& adapter = default_adapter());

struct BatchItem {
  ModelResponse response;
  std::string error;  // empty on success
  bool ok() const { return error.empty(); }
};

// Bounded fan-out: at most cfg.max_in_flight outstanding requests, results
// in input order, per-item failures embedded rather than aborting the batch.
std::vector<BatchItem> batch_complete(const std::vector<ChatRequest>& reqs,
                                      const ClientConfig& cfg,
                                      const WireAdapter& adapter = default_adapter());

}  // namespace ferkit
