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

// Executes prompt plans against chat-completion providers: n samples per
// prompt at a fixed temperature, Likert parsing with fresh-completion
// retries, and a content-addressed response cache that makes reruns
// deterministic and replayable offline.

#ifndef SMEVAL_GATEWAY_HPP_
#define SMEVAL_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smeval/design.hpp"
#include "smeval/error.hpp"
#include "smeval/json_io.hpp"
#include "smeval/promptgen.hpp"

namespace smeval {

struct RunConfig {
  double temperature = 1.0;
  int samples_per_query = 10;
  // Completions per sample before it is recorded as Missing.
  int max_parse_retries = 3;
  int max_concurrency = 4;
  std::string provider_model_id;
  double requests_per_minute = 60.0;  // <= 0 disables rate limiting
  int transport_retries = 4;
  std::chrono::milliseconds backoff_base{1000};
  // Optional USD prices per million tokens for the run summary.
  double input_price_per_mtok = 0.0;
  double output_price_per_mtok = 0.0;

  void validate() const;  // ConfigError on bad values
};

// Parses a Likert answer. Whitespace and markdown are stripped; a lone
// integer in [1, 7] is accepted; otherwise a trailing "Answer: N" (or
// "Rating: N") line wins; otherwise exactly one distinct standalone integer
// in [1, 7] must occur. Anything else is nullopt.
std::optional<int> parse_likert(std::string_view raw);

struct CompletionRequest {
  std::string_view prompt;
  double temperature = 1.0;
  int sample_index = 0;
  int attempt = 0;
};

struct CompletionResult {
  std::string text;
  long long input_tokens = 0;
  long long output_tokens = 0;
};

// Transport or HTTP failure. Retryable failures (network, 429, 5xx) are
// retried with exponential backoff.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class ProviderClient {
 public:
  virtual ~ProviderClient() = default;
  virtual CompletionResult complete(const CompletionRequest& req) = 0;
  virtual std::string provider_name() const = 0;
  virtual std::string model_id() const = 0;
  // A replay-only client never completes; every sample must be cached.
  virtual bool replay_only() const { return false; }
  // Completions that went over the network (or to the script).
  long long calls() const { return calls_.load(); }

 protected:
  void count_call() { ++calls_; }

 private:
  std::atomic<long long> calls_{0};
};

// Scripted offline provider. The script sees the full request, so output
// can depend on the sample index deterministically.
class MockProvider : public ProviderClient {
 public:
  using Script = std::function<std::string(const CompletionRequest&)>;

  explicit MockProvider(Script script, std::string model_id = "mock");
  static std::unique_ptr<MockProvider> constant(std::string response,
                                                std::string model_id = "mock");
  // Rating derived from a hash of (prompt, sample index, attempt), so
  // different prompts get different but reproducible answers.
  static std::unique_ptr<MockProvider> hashed(std::string model_id = "mock");

  CompletionResult complete(const CompletionRequest& req) override;
  std::string provider_name() const override { return "mock"; }
  std::string model_id() const override { return model_id_; }

 private:
  Script script_;
  std::string model_id_;
};

class ReplayProvider : public ProviderClient {
 public:
  explicit ReplayProvider(std::string model_id)
      : model_id_(std::move(model_id)) {}
  CompletionResult complete(const CompletionRequest&) override {
    throw Error("replay provider cannot complete prompts");
  }
  std::string provider_name() const override { return "replay"; }
  std::string model_id() const override { return model_id_; }
  bool replay_only() const override { return true; }

 private:
  std::string model_id_;
};

enum class ProviderFamily { kOpenAI, kAnthropic, kGemini };

// JSON-over-HTTPS chat completion client. The API key is read from
// OPENAI_API_KEY / ANTHROPIC_API_KEY / GEMINI_API_KEY; the endpoint from
// OPENAI_BASE_URL / ANTHROPIC_BASE_URL / GEMINI_BASE_URL when set.
class HttpProvider : public ProviderClient {
 public:
  HttpProvider(ProviderFamily family, std::string model_id,
               std::string api_key, std::string base_url);
  // Reads key and base URL from the environment; ConfigError if the key
  // variable is unset.
  static std::unique_ptr<HttpProvider> from_env(ProviderFamily family,
                                                std::string model_id);

  CompletionResult complete(const CompletionRequest& req) override;
  std::string provider_name() const override;
  std::string model_id() const override { return model_id_; }

  // Exposed for tests of the wire format.
  Json request_body(const CompletionRequest& req) const;
  CompletionResult parse_response(const Json& body) const;

 private:
  ProviderFamily family_;
  std::string model_id_;
  std::string api_key_;
  std::string base_url_;
};

ProviderFamily parse_provider_family(std::string_view s);
std::string_view api_key_env_var(ProviderFamily f);

// Simple token bucket; requests_per_minute <= 0 never blocks.
class TokenBucket {
 public:
  explicit TokenBucket(double requests_per_minute);
  void acquire();

 private:
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mu_;
};

struct SampleRecord {
  std::string prompt_key;
  std::string provider_model_id;
  std::vector<std::string> raw_texts;  // one per completion, in order
  std::optional<int> parsed;
  int attempts = 0;
  std::string timestamp;  // ISO 8601 UTC of the last update
  long long input_tokens = 0;
  long long output_tokens = 0;

  bool is_final(int max_attempts) const {
    return parsed.has_value() || attempts >= max_attempts;
  }
};

void to_json(Json& j, const SampleRecord& r);
void from_json(const Json& j, SampleRecord& r);

// SHA-256 of (model id, prompt, temperature, sample index).
std::string cache_key(std::string_view provider_model_id,
                      std::string_view prompt, double temperature,
                      int sample_index);

// One JSON document per key at <root>/<key[0:2]>/<key>.json. Writes go
// through a unique temp file and a rename, so concurrent writers never
// leave a torn document.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);
  std::optional<SampleRecord> load(const std::string& key) const;
  void store(const SampleRecord& record) const;
  std::filesystem::path path_for(const std::string& key) const;

 private:
  std::filesystem::path root_;
};

enum class SampleStatus { kOk, kMissing, kFailed };

struct SampleOutcome {
  DesignCoordinates coords;
  PromptCondition condition = PromptCondition::kMIN;
  int sample_index = 0;
  SampleStatus status = SampleStatus::kOk;
  std::optional<int> rating;
  std::string error;
  bool cache_hit = false;
};

struct RunSummary {
  std::size_t instances = 0;
  std::size_t sample_slots = 0;
  std::size_t parsed = 0;
  std::size_t missing = 0;
  std::size_t failed = 0;
  std::size_t cache_hits = 0;
  long long network_calls = 0;
  long long input_tokens = 0;
  long long output_tokens = 0;
  double estimated_cost_usd = 0.0;
  // Missing (unparseable or failed) fraction per (coords, condition).
  std::map<std::string, double> missing_fraction;
  std::vector<std::string> invalid_instances;
};

Json to_json(const RunSummary& s);

struct RunResult {
  std::vector<SampleOutcome> samples;  // plan order, then sample index
  RunSummary summary;

  // Successfully parsed samples as model RatingRecords.
  std::vector<RatingRecord> records() const;
};

// Runs every plan instance `samples_per_query` times. Completions are
// issued from up to max_concurrency threads; results are ordered by plan
// position and sample index regardless of completion order. A replay-only
// client raises Error listing the missing keys before doing any work.
RunResult run_plan(std::span<const PromptInstance> plan,
                   ProviderClient& client, const RunConfig& config,
                   const ResponseCache& cache);

// One object per sample: RatingRecord fields plus condition, model and
// status; "rating" is null for Missing or failed samples.
std::string ratings_jsonl(const RunResult& result, std::string_view model_id);

}  // namespace smeval

#endif  // SMEVAL_GATEWAY_HPP_
