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

#include "deltacheck/llm_gateway.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "deltacheck/errors.hpp"
#include "deltacheck/json_io.hpp"
#include "deltacheck/text.hpp"

namespace deltacheck {
namespace {

constexpr std::string_view kBooleanSystemText =
    "You are an expert evaluator of LLM pipeline outputs. You will be given the "
    "prompt that was sent to an LLM, the LLM's response, and a yes/no question "
    "about the response. Answer with exactly one word: yes or no.";

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return buf;
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

const char* env_or_null(const char* name) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? v : nullptr;
}

}  // namespace

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::kCategorize: return "CATEGORIZE";
    case RequestKind::kSynthesize: return "SYNTHESIZE";
    case RequestKind::kSubsumeList: return "SUBSUME_LIST";
    case RequestKind::kSubsumeFormat: return "SUBSUME_FORMAT";
    case RequestKind::kAskBoolean: return "ASK_BOOLEAN";
  }
  return "UNKNOWN";
}

void LlmRequest::validate() const {
  if (text::trim(user_text).empty()) throw PreconditionError("LLM request without user text");
  if (!(temperature >= 0.0 && temperature <= 1.0)) {
    throw PreconditionError("temperature must lie in [0, 1]");
  }
  if ((kind == RequestKind::kAskBoolean || kind == RequestKind::kSubsumeFormat) &&
      temperature != 0.0) {
    throw PreconditionError(std::string(to_string(kind)) + " requests run at temperature 0");
  }
}

std::string LlmRequest::cache_key() const {
  nlohmann::json canonical = nlohmann::json::array(
      {std::string(to_string(kind)), text::normalize_whitespace(system_text),
       text::normalize_whitespace(user_text), format_temperature(temperature)});
  return sha256_hex(canonical.dump());
}

nlohmann::json LlmRequest::to_json() const {
  return {{"kind", std::string(to_string(kind))},
          {"system_text", system_text},
          {"user_text", user_text},
          {"temperature", temperature}};
}

std::string_view to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::kLive: return "live";
    case GatewayMode::kRecord: return "record";
    case GatewayMode::kReplay: return "replay";
    case GatewayMode::kOff: return "off";
  }
  return "off";
}

GatewayMode parse_gateway_mode(std::string_view name) {
  std::string n = text::fold_case(text::trim(name));
  if (n == "live") return GatewayMode::kLive;
  if (n == "record") return GatewayMode::kRecord;
  if (n == "replay") return GatewayMode::kReplay;
  if (n == "off") return GatewayMode::kOff;
  throw ValidationError("unknown gateway mode '" + std::string(name) +
                        "' (expected live, record, replay or off)");
}

GatewayConfig GatewayConfig::from_env() {
  GatewayConfig config;
  if (const char* v = env_or_null("SPADE_LLM_MODE")) config.mode = parse_gateway_mode(v);
  if (const char* v = env_or_null("SPADE_LLM_API_KEY")) config.api_key = v;
  if (const char* v = env_or_null("SPADE_LLM_ENDPOINT")) config.endpoint = v;
  if (const char* v = env_or_null("SPADE_CACHE_DIR")) config.cache_dir = v;
  if (const char* v = env_or_null("SPADE_LLM_MODEL")) config.model = v;
  return config;
}

LlmGateway::LlmGateway(GatewayConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

std::filesystem::path LlmGateway::cache_path(const std::string& key) const {
  return config_.cache_dir / key;
}

LlmResponse LlmGateway::complete(const LlmRequest& request) {
  request.validate();
  switch (config_.mode) {
    case GatewayMode::kOff:
      throw ProviderError("LLM gateway is disabled");
    case GatewayMode::kReplay: {
      const std::string key = request.cache_key();
      const auto path = cache_path(key);
      std::error_code ec;
      if (!std::filesystem::exists(path, ec)) {
        throw CacheMissError("no cached response for " + std::string(to_string(request.kind)) +
                             " request " + key);
      }
      auto doc = read_json_file(path);
      if (!doc.contains("response") || !doc["response"].is_string()) {
        throw ParseError("cache entry " + path.string() + " has no string response");
      }
      return {doc["response"].get<std::string>(), true};
    }
    case GatewayMode::kLive:
      return {call_provider(request), false};
    case GatewayMode::kRecord: {
      std::string reply = call_provider(request);
      nlohmann::json entry = {{"request", request.to_json()}, {"response", reply}};
      std::lock_guard<std::mutex> lock(cache_mutex_);
      write_json_file(cache_path(request.cache_key()), entry);
      return {std::move(reply), false};
    }
  }
  throw Error("unreachable gateway mode");
}

std::string LlmGateway::call_provider(const LlmRequest& request) {
  if (config_.api_key.empty()) {
    throw AuthError("SPADE_LLM_API_KEY is required in live and record modes");
  }
  std::call_once(transport_once_, [this] {
    if (!transport_) transport_ = make_http_transport(config_.request_timeout);
  });

  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  const nlohmann::json body = {{"model", config_.model},
                               {"messages", std::move(messages)},
                               {"temperature", request.temperature}};
  const Transport::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      sleep_(backoff);
      backoff *= 2;
    }
    ++network_calls_;
    Transport::Reply reply;
    try {
      reply = transport_->post(config_.endpoint, headers, body.dump());
    } catch (const ProviderError& e) {
      last_error = e.what();
      spdlog::warn("LLM request attempt {} failed: {}", attempt, last_error);
      continue;
    }
    if (reply.status == 401 || reply.status == 403) {
      throw AuthError("provider rejected credentials (HTTP " + std::to_string(reply.status) + ")");
    }
    if (reply.status == 429 || reply.status >= 500) {
      last_error = "HTTP " + std::to_string(reply.status);
      spdlog::warn("LLM request attempt {} failed: {}", attempt, last_error);
      continue;
    }
    if (reply.status < 200 || reply.status >= 300) {
      throw ProviderError("provider returned HTTP " + std::to_string(reply.status) + ": " +
                          reply.body.substr(0, 200));
    }
    try {
      auto doc = nlohmann::json::parse(reply.body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("malformed provider reply: ") + e.what());
    }
  }
  throw ProviderError("LLM request failed after " + std::to_string(config_.max_attempts) +
                      " attempts: " + last_error);
}

bool LlmGateway::ask_boolean(std::string_view formatted_prompt, std::string_view response,
                             std::string_view question) {
  LlmRequest request;
  request.kind = RequestKind::kAskBoolean;
  request.temperature = 0.0;
  request.system_text = std::string(kBooleanSystemText);
  request.user_text = "Prompt:\n" + std::string(formatted_prompt) + "\n\nResponse:\n" +
                      std::string(response) + "\n\nQuestion: " + std::string(question) +
                      "\nAnswer yes or no.";
  return parse_yes_no(complete(request).text);
}

bool parse_yes_no(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size() && (text::is_space(reply[i]) || reply[i] == '*' ||
                              reply[i] == '"' || reply[i] == '\'' || reply[i] == '`')) {
    ++i;
  }
  std::size_t j = i;
  while (j < reply.size() && is_alpha(reply[j])) ++j;
  const std::string token = text::fold_case(reply.substr(i, j - i));
  if (token == "yes") return true;
  if (token == "no") return false;
  throw AmbiguousReplyError("expected yes or no, got: " +
                            std::string(reply.substr(0, 80)));
}

}  // namespace deltacheck
