// Copyright 2026 The Deltacheck Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DELTACHECK_LLM_GATEWAY_HPP_
#define DELTACHECK_LLM_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace deltacheck {

enum class RequestKind { kCategorize, kSynthesize, kSubsumeList, kSubsumeFormat, kAskBoolean };

std::string_view to_string(RequestKind kind);

struct LlmRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  RequestKind kind = RequestKind::kCategorize;

  // Throws PreconditionError on an empty user text, a temperature outside
  // [0, 1], or a non-zero temperature for judgment and formatting requests.
  void validate() const;

  // Hex SHA-256 over (kind, system text, user text, temperature) after
  // whitespace normalization. Stable across runs and platforms.
  std::string cache_key() const;

  nlohmann::json to_json() const;
};

struct LlmResponse {
  std::string text;
  bool cached = false;
};

// Raw HTTP POST used by live and record modes. Implementations throw
// ProviderError when the request never produced an HTTP status.
class Transport {
 public:
  struct Reply {
    int status = 0;
    std::string body;
  };
  using Headers = std::vector<std::pair<std::string, std::string>>;

  virtual ~Transport() = default;
  virtual Reply post(const std::string& url, const Headers& headers,
                     const std::string& body) = 0;
};

std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout);

enum class GatewayMode { kLive, kRecord, kReplay, kOff };

std::string_view to_string(GatewayMode mode);
GatewayMode parse_gateway_mode(std::string_view name);

struct GatewayConfig {
  GatewayMode mode = GatewayMode::kReplay;
  std::string api_key;
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4";
  std::filesystem::path cache_dir = ".deltacheck-cache";
  // Used for CATEGORIZE and SYNTHESIZE requests.
  double generation_temperature = 0.7;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::seconds request_timeout{120};

  // SPADE_LLM_MODE, SPADE_LLM_API_KEY, SPADE_LLM_ENDPOINT, SPADE_CACHE_DIR and
  // SPADE_LLM_MODEL override the defaults when set.
  static GatewayConfig from_env();
};

// Chat-completion client with a content-addressed response cache.
//
//   live    forwards every request to the provider
//   record  forwards, then stores (request, response) under the request key
//   replay  answers from the cache only; never touches the network
//   off     fails every request with ProviderError
//
// complete() is safe to call from multiple threads. Cache writes are
// serialized and atomic, so a key recorded by one thread is visible to
// later replays on any thread.
class LlmGateway {
 public:
  explicit LlmGateway(GatewayConfig config, std::shared_ptr<Transport> transport = nullptr);

  LlmResponse complete(const LlmRequest& request);

  // Asks a yes/no question about a response. Throws AmbiguousReplyError when
  // the reply starts with neither "yes" nor "no".
  bool ask_boolean(std::string_view formatted_prompt, std::string_view response,
                   std::string_view question);

  const GatewayConfig& config() const { return config_; }
  std::size_t network_calls() const { return network_calls_.load(); }

  void set_sleep_function(std::function<void(std::chrono::milliseconds)> sleep) {
    sleep_ = std::move(sleep);
  }

 private:
  std::string call_provider(const LlmRequest& request);
  std::filesystem::path cache_path(const std::string& key) const;

  GatewayConfig config_;
  std::shared_ptr<Transport> transport_;
  std::function<void(std::chrono::milliseconds)> sleep_;
  std::mutex cache_mutex_;
  std::once_flag transport_once_;
  std::atomic<std::size_t> network_calls_{0};
};

// True for "yes", false for "no": the first alphabetic token of the reply,
// case-insensitive. Anything else throws AmbiguousReplyError.
bool parse_yes_no(std::string_view reply);

}  // namespace deltacheck

#endif  // DELTACHECK_LLM_GATEWAY_HPP_
