/*
 * Copyright 2026 The smeval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cctype>
#include <cstdlib>

#include "smeval/gateway.hpp"

namespace smeval {

namespace {

std::string_view base_url_env_var(ProviderFamily f) {
  switch (f) {
    case ProviderFamily::kOpenAI: return "OPENAI_BASE_URL";
    case ProviderFamily::kAnthropic: return "ANTHROPIC_BASE_URL";
    case ProviderFamily::kGemini: return "GEMINI_BASE_URL";
  }
  return "";
}

std::string_view default_base_url(ProviderFamily f) {
  switch (f) {
    case ProviderFamily::kOpenAI: return "https://api.openai.com";
    case ProviderFamily::kAnthropic: return "https://api.anthropic.com";
    case ProviderFamily::kGemini:
      return "https://generativelanguage.googleapis.com";
  }
  return "";
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

ProviderFamily parse_provider_family(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (lower == "openai" || lower == "gpt") return ProviderFamily::kOpenAI;
  if (lower == "anthropic" || lower == "claude") {
    return ProviderFamily::kAnthropic;
  }
  if (lower == "gemini" || lower == "google") return ProviderFamily::kGemini;
  throw ConfigError("unknown provider '" + std::string(s) + "'");
}

std::string_view api_key_env_var(ProviderFamily f) {
  switch (f) {
    case ProviderFamily::kOpenAI: return "OPENAI_API_KEY";
    case ProviderFamily::kAnthropic: return "ANTHROPIC_API_KEY";
    case ProviderFamily::kGemini: return "GEMINI_API_KEY";
  }
  return "";
}

HttpProvider::HttpProvider(ProviderFamily family, std::string model_id,
                           std::string api_key, std::string base_url)
    : family_(family),
      model_id_(std::move(model_id)),
      api_key_(std::move(api_key)),
      base_url_(std::move(base_url)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::unique_ptr<HttpProvider> HttpProvider::from_env(ProviderFamily family,
                                                     std::string model_id) {
  const std::string key_var(api_key_env_var(family));
  const char* key = std::getenv(key_var.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("environment variable " + key_var + " is not set");
  }
  const std::string url_var(base_url_env_var(family));
  const char* url = std::getenv(url_var.c_str());
  std::string base = url && *url ? url : std::string(default_base_url(family));
  return std::make_unique<HttpProvider>(family, std::move(model_id), key,
                                        std::move(base));
}

std::string HttpProvider::provider_name() const {
  switch (family_) {
    case ProviderFamily::kOpenAI: return "openai";
    case ProviderFamily::kAnthropic: return "anthropic";
    case ProviderFamily::kGemini: return "gemini";
  }
  return "?";
}

Json HttpProvider::request_body(const CompletionRequest& req) const {
  const std::string prompt(req.prompt);
  switch (family_) {
    case ProviderFamily::kOpenAI:
      return Json{{"model", model_id_},
                  {"messages", Json::array({Json{{"role", "user"},
                                                 {"content", prompt}}})},
                  {"temperature", req.temperature}};
    case ProviderFamily::kAnthropic:
      return Json{{"model", model_id_},
                  {"max_tokens", 1024},
                  {"messages", Json::array({Json{{"role", "user"},
                                                 {"content", prompt}}})},
                  {"temperature", req.temperature}};
    case ProviderFamily::kGemini:
      return Json{
          {"contents",
           Json::array({Json{{"role", "user"},
                             {"parts", Json::array({Json{{"text", prompt}}})}}})},
          {"generationConfig", Json{{"temperature", req.temperature}}}};
  }
  return Json{};
}

CompletionResult HttpProvider::parse_response(const Json& body) const {
  CompletionResult out;
  try {
    switch (family_) {
      case ProviderFamily::kOpenAI: {
        const auto& msg = body.at("choices").at(0).at("message");
        out.text = msg.at("content").is_null()
                       ? std::string{}
                       : msg.at("content").get<std::string>();
        if (body.contains("usage")) {
          out.input_tokens = body["usage"].value("prompt_tokens", 0LL);
          out.output_tokens = body["usage"].value("completion_tokens", 0LL);
        }
        break;
      }
      case ProviderFamily::kAnthropic: {
        for (const auto& block : body.at("content")) {
          if (block.value("type", std::string{}) == "text") {
            out.text += block.at("text").get<std::string>();
          }
        }
        if (body.contains("usage")) {
          out.input_tokens = body["usage"].value("input_tokens", 0LL);
          out.output_tokens = body["usage"].value("output_tokens", 0LL);
        }
        break;
      }
      case ProviderFamily::kGemini: {
        const auto& cand = body.at("candidates").at(0);
        if (cand.contains("content") && cand["content"].contains("parts")) {
          for (const auto& part : cand["content"]["parts"]) {
            if (part.contains("text") && !part.value("thought", false)) {
              out.text += part["text"].get<std::string>();
            }
          }
        }
        if (body.contains("usageMetadata")) {
          out.input_tokens = body["usageMetadata"].value("promptTokenCount", 0LL);
          out.output_tokens =
              body["usageMetadata"].value("candidatesTokenCount", 0LL);
        }
        break;
      }
    }
  } catch (const Json::exception& e) {
    throw TransportError(provider_name() + ": unexpected response shape: " +
                             e.what(),
                         false);
  }
  return out;
}

CompletionResult HttpProvider::complete(const CompletionRequest& req) {
  count_call();
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(std::chrono::seconds(180));

  httplib::Headers headers;
  std::string path;
  switch (family_) {
    case ProviderFamily::kOpenAI:
      path = "/v1/chat/completions";
      headers.emplace("Authorization", "Bearer " + api_key_);
      break;
    case ProviderFamily::kAnthropic:
      path = "/v1/messages";
      headers.emplace("x-api-key", api_key_);
      headers.emplace("anthropic-version", "2023-06-01");
      break;
    case ProviderFamily::kGemini:
      path = "/v1beta/models/" + model_id_ + ":generateContent";
      headers.emplace("x-goog-api-key", api_key_);
      break;
  }

  auto res = client.Post(path, headers, request_body(req).dump(),
                         "application/json");
  if (!res) {
    throw TransportError(provider_name() + ": " +
                             httplib::to_string(res.error()),
                         true);
  }
  if (res->status != 200) {
    throw TransportError(provider_name() + ": HTTP " +
                             std::to_string(res->status) + ": " +
                             res->body.substr(0, 300),
                         retryable_status(res->status));
  }
  Json body;
  try {
    body = Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    throw TransportError(provider_name() + ": invalid JSON: " + e.what(),
                         true);
  }
  return parse_response(body);
}

}  // namespace smeval
