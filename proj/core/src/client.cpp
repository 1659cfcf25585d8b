#include "ferkit/client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include <openssl/evp.h>

#include "ferkit/errors.hpp"
#include "ferkit/jsonl.hpp"

namespace ferkit {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kBase64Table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(std::string_view data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                       (static_cast<unsigned char>(data[i + 1]) << 8) |
                       static_cast<unsigned char>(data[i + 2]);
    out.push_back(kBase64Table[(v >> 18) & 63]);
    out.push_back(kBase64Table[(v >> 12) & 63]);
    out.push_back(kBase64Table[(v >> 6) & 63]);
    out.push_back(kBase64Table[v & 63]);
  }
  const std::size_t rem = data.size() - i;
  if (rem == 1) {
    const unsigned v = static_cast<unsigned char>(data[i]) << 16;
    out.push_back(kBase64Table[(v >> 18) & 63]);
    out.push_back(kBase64Table[(v >> 12) & 63]);
    out += "==";
  } else if (rem == 2) {
    const unsigned v = (static_cast<unsigned char>(data[i]) << 16) |
                       (static_cast<unsigned char>(data[i + 1]) << 8);
    out.push_back(kBase64Table[(v >> 18) & 63]);
    out.push_back(kBase64Table[(v >> 12) & 63]);
    out.push_back(kBase64Table[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ClientError("endpoint URL lacks a scheme: " + url);
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    return {url, "/v1/chat/completions"};  // conventional default path
  }
  return {url.substr(0, slash), url.substr(slash)};
}

std::filesystem::path cache_path(const ClientConfig& cfg, const std::string& digest) {
  return std::filesystem::path(cfg.cache_dir) / (digest + ".json");
}

// Miss on any read/parse trouble; a damaged entry is refetched, not fatal.
std::optional<ModelResponse> cache_lookup(const ClientConfig& cfg, const std::string& digest) {
  if (cfg.cache_dir.empty()) return std::nullopt;
  const auto path = cache_path(cfg, digest);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const ordered_json doc = ordered_json::parse(read_text_file(path));
    ModelResponse resp;
    resp.request_digest = doc.at("request_digest").get<std::string>();
    resp.text = doc.at("text").get<std::string>();
    resp.latency_ms = doc.at("latency_ms").get<std::int64_t>();
    resp.from_cache = true;
    resp.attempt_count = 0;
    if (resp.request_digest != digest) return std::nullopt;
    return resp;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void cache_store(const ClientConfig& cfg, const ChatRequest& req, const ModelResponse& resp) {
  if (cfg.cache_dir.empty()) return;
  ordered_json doc;
  doc["request_digest"] = resp.request_digest;
  doc["model"] = req.model;
  doc["text"] = resp.text;
  doc["created_at"] = iso8601_utc_now();
  doc["latency_ms"] = resp.latency_ms;
  atomic_write_file(cache_path(cfg, resp.request_digest), doc.dump(2) + "\n");
}

int backoff_with_jitter_ms(const ClientConfig& cfg, int attempt) {
  static thread_local std::mt19937_64 jitter_rng(
      std::random_device{}() ^
      std::hash<std::thread::id>{}(std::this_thread::get_id()));
  double delay = static_cast<double>(cfg.backoff_base_ms);
  for (int i = 0; i < attempt; ++i) delay *= 2.0;
  delay = std::min(delay, static_cast<double>(cfg.backoff_ceiling_ms));
  std::uniform_real_distribution<double> half(0.5, 1.0);
  return static_cast<int>(delay * half(jitter_rng));
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string request_digest(const ChatRequest& req) {
  // Length-prefixed fields so adjacent values can never collide by
  // concatenation.
  char temp[40];
  std::snprintf(temp, sizeof(temp), "%.17g", req.temperature);
  std::string material;
  const std::string_view fields[] = {req.model, req.system, req.user, req.image,
                                     std::string_view(temp)};
  for (std::string_view f : fields) {
    material += std::to_string(f.size());
    material += ':';
    material += f;
  }
  return sha256_hex(material);
}

std::string WireAdapter::request_body(const ChatRequest& req) const {
  ordered_json user_content;
  if (req.image.empty()) {
    user_content = req.user;
  } else {
    user_content = ordered_json::array();
    user_content.push_back({{"type", "text"}, {"text", req.user}});
    user_content.push_back(
        {{"type", "image_url"},
         {"image_url",
          {{"url",
            "data:" + req.image_media_type + ";base64," + base64_encode(req.image)}}}});
  }
  ordered_json doc;
  doc["model"] = req.model;
  doc["temperature"] = req.temperature;
  doc["max_tokens"] = req.max_output_tokens;
  doc["messages"] = ordered_json::array();
  if (!req.system.empty()) {
    doc["messages"].push_back({{"role", "system"}, {"content", req.system}});
  }
  doc["messages"].push_back({{"role", "user"}, {"content", std::move(user_content)}});
  return doc.dump();
}

std::string WireAdapter::parse_response(const std::string& body) const {
  const ordered_json doc = ordered_json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw MalformedResponse("response body is not JSON");
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedResponse("response content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedResponse("response lacks choices[0].message.content");
  }
}

const WireAdapter& default_adapter() {
  static const WireAdapter adapter;
  return adapter;
}

ModelResponse complete(const ChatRequest& req, const ClientConfig& cfg,
                       const WireAdapter& adapter) {
  if (req.temperature < 0.0) throw ClientError("temperature must be >= 0");
  const std::string digest = request_digest(req);
  if (auto hit = cache_lookup(cfg, digest)) return *hit;

  const Endpoint ep = split_endpoint(cfg.endpoint);
  httplib::Client http(ep.base);
  http.set_connection_timeout(cfg.timeout_sec, 0);
  http.set_read_timeout(cfg.timeout_sec, 0);
  http.set_write_timeout(cfg.timeout_sec, 0);

  httplib::Headers headers;
  if (!cfg.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const std::string body = adapter.request_body(req);
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= cfg.retry_budget; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_with_jitter_ms(cfg, attempt - 1)));
    }
    const auto start = std::chrono::steady_clock::now();
    httplib::Result result = http.Post(ep.path, headers, body, "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw AuthError("endpoint rejected credentials (http " + std::to_string(status) + ")");
    }
    if (retryable_status(status)) {
      last_failure = "http " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw ClientError("http " + std::to_string(status) + ": " + result->body);
    }
    ModelResponse resp;
    resp.request_digest = digest;
    resp.text = adapter.parse_response(result->body);
    resp.latency_ms = elapsed;
    resp.from_cache = false;
    resp.attempt_count = attempt + 1;
    cache_store(cfg, req, resp);
    return resp;
  }
  throw ExhaustedRetries("retry budget spent after " + std::to_string(cfg.retry_budget + 1) +
                         " attempts; last failure: " + last_failure);
}

std::vector<BatchItem> batch_complete(const std::vector<ChatRequest>& reqs,
                                      const ClientConfig& cfg, const WireAdapter& adapter) {
  std::vector<BatchItem> out(reqs.size());
  if (reqs.empty()) return out;

  const std::size_t workers =
      std::min<std::size_t>(std::max(cfg.max_in_flight, 1), reqs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= reqs.size()) return;
      try {
        out[i].response = complete(reqs[i], cfg, adapter);
      } catch (const std::exception& ex) {
        out[i].error = ex.what();
        if (out[i].error.empty()) out[i].error = "unknown client failure";
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return out;
}

}  // namespace ferkit
