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

#include "smeval/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <ctime>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "smeval/hash.hpp"
#include "smeval/ingest.hpp"

namespace smeval {

namespace {

bool is_markdown(char c) {
  return c == '*' || c == '_' || c == '`' || c == '#' || c == '>' || c == '~';
}

std::string strip(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (!is_markdown(c)) out += c;
  }
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = out.size();
  while (b < e && is_space(out[b])) ++b;
  while (e > b && is_space(out[e - 1])) --e;
  return out.substr(b, e - b);
}

std::optional<int> lone_integer(std::string_view s) {
  // "6", "6.", "6/7"
  if (s.ends_with("/7")) s.remove_suffix(2);
  if (s.ends_with(".")) s.remove_suffix(1);
  if (s.empty() || s.size() > 3) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string last_nonempty_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
  }
  return last;
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string_view to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::kOk: return "ok";
    case SampleStatus::kMissing: return "missing";
    case SampleStatus::kFailed: return "failed";
  }
  return "?";
}

}  // namespace

void RunConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (samples_per_query < 1) {
    throw ConfigError("samples_per_query must be >= 1");
  }
  if (max_parse_retries < 1) {
    throw ConfigError("max_parse_retries must be >= 1");
  }
  if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
  if (transport_retries < 0) {
    throw ConfigError("transport_retries must be >= 0");
  }
}

std::optional<int> parse_likert(std::string_view raw) {
  const std::string text = strip(raw);
  if (text.empty()) return std::nullopt;

  if (auto v = lone_integer(text)) {
    if (is_likert(*v)) return v;
    return std::nullopt;
  }

  static const std::regex kAnswerLine(
      R"(^\s*(?:final\s+)?(?:answer|rating)\s*[:=\-]?\s*([0-9]+)\s*(?:/\s*7)?\s*\.?\s*$)",
      std::regex::icase);
  std::smatch m;
  const std::string last = last_nonempty_line(text);
  if (std::regex_match(last, m, kAnswerLine)) {
    int v = std::stoi(m[1].str());
    if (is_likert(v)) return v;
    return std::nullopt;
  }

  // Standalone integers: digit runs not touching letters, digits, '.' + digit
  // (decimals), '$' or '-' joins like "7-point".
  std::set<int> candidates;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    auto touches = [&](std::size_t pos, bool before) {
      if (before ? pos == 0 : pos >= n) return false;
      char c = text[before ? pos - 1 : pos];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '$' ||
          c == '-' || c == '%') {
        return true;
      }
      if (c == '.' || c == ',') {
        std::size_t k = before ? pos - 1 : pos;
        bool digit_beyond =
            before ? (k > 0 && std::isdigit(static_cast<unsigned char>(text[k - 1])))
                   : (k + 1 < n &&
                      std::isdigit(static_cast<unsigned char>(text[k + 1])));
        return digit_beyond;
      }
      return false;
    };
    if (!touches(i, true) && !touches(j, false) && j - i <= 2) {
      int v = std::stoi(text.substr(i, j - i));
      if (is_likert(v)) candidates.insert(v);
    }
    i = j;
  }
  if (candidates.size() == 1) return *candidates.begin();
  return std::nullopt;
}

MockProvider::MockProvider(Script script, std::string model_id)
    : script_(std::move(script)), model_id_(std::move(model_id)) {}

std::unique_ptr<MockProvider> MockProvider::constant(std::string response,
                                                     std::string model_id) {
  return std::make_unique<MockProvider>(
      [response = std::move(response)](const CompletionRequest&) {
        return response;
      },
      std::move(model_id));
}

std::unique_ptr<MockProvider> MockProvider::hashed(std::string model_id) {
  return std::make_unique<MockProvider>(
      [](const CompletionRequest& req) {
        std::string material(req.prompt);
        material += '\0';
        material += std::to_string(req.sample_index);
        material += '\0';
        material += std::to_string(req.attempt);
        const std::string h = sha256_hex(material);
        const int v = 1 + static_cast<int>(std::stoul(h.substr(0, 8), nullptr,
                                                      16) % 7);
        return std::to_string(v);
      },
      std::move(model_id));
}

CompletionResult MockProvider::complete(const CompletionRequest& req) {
  count_call();
  return CompletionResult{script_(req), 0, 0};
}

TokenBucket::TokenBucket(double requests_per_minute)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_per_sec_ <= 0.0) return;
  while (true) {
    std::chrono::duration<double> wait{0.0};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto now = std::chrono::steady_clock::now();
      std::chrono::duration<double> elapsed = now - last_;
      last_ = now;
      tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_per_sec_);
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_);
    }
    std::this_thread::sleep_for(wait);
  }
}

void to_json(Json& j, const SampleRecord& r) {
  j = Json{{"prompt_key", r.prompt_key},
           {"provider_model_id", r.provider_model_id},
           {"raw_texts", r.raw_texts},
           {"parsed", r.parsed ? Json(*r.parsed) : Json(nullptr)},
           {"attempts", r.attempts},
           {"timestamp", r.timestamp},
           {"input_tokens", r.input_tokens},
           {"output_tokens", r.output_tokens}};
}

void from_json(const Json& j, SampleRecord& r) {
  r.prompt_key = j.at("prompt_key").get<std::string>();
  r.provider_model_id = j.at("provider_model_id").get<std::string>();
  r.raw_texts = j.at("raw_texts").get<std::vector<std::string>>();
  r.parsed = j.at("parsed").is_null()
                 ? std::nullopt
                 : std::optional<int>(j.at("parsed").get<int>());
  r.attempts = j.at("attempts").get<int>();
  r.timestamp = j.value("timestamp", std::string{});
  r.input_tokens = j.value("input_tokens", 0LL);
  r.output_tokens = j.value("output_tokens", 0LL);
}

std::string cache_key(std::string_view provider_model_id,
                      std::string_view prompt, double temperature,
                      int sample_index) {
  std::string material;
  material += provider_model_id;
  material += '\0';
  material += prompt;
  material += '\0';
  material += format_double(temperature);
  material += '\0';
  material += std::to_string(sample_index);
  return sha256_hex(material);
}

ResponseCache::ResponseCache(std::filesystem::path root)
    : root_(std::move(root)) {}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return root_ / key.substr(0, 2) / (key + ".json");
}

std::optional<SampleRecord> ResponseCache::load(const std::string& key) const {
  const auto path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    Json j = Json::parse(in);
    SampleRecord r = j.get<SampleRecord>();
    if (r.prompt_key != key) {
      throw Error("cache entry " + path.string() + " has a mismatched key");
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error("corrupt cache entry " + path.string() + ": " + e.what());
  }
}

void ResponseCache::store(const SampleRecord& record) const {
  const auto path = path_for(record.prompt_key);
  std::filesystem::create_directories(path.parent_path());
  static std::atomic<unsigned long long> counter{0};
  std::ostringstream tmp_name;
  tmp_name << record.prompt_key << ".tmp." << std::this_thread::get_id() << "."
           << counter++;
  const auto tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file " + tmp.string());
    out << Json(record).dump(2) << '\n';
    if (!out) throw Error("cache write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Json to_json(const RunSummary& s) {
  Json j;
  j["instances"] = s.instances;
  j["sample_slots"] = s.sample_slots;
  j["parsed"] = s.parsed;
  j["missing"] = s.missing;
  j["failed"] = s.failed;
  j["cache_hits"] = s.cache_hits;
  j["network_calls"] = s.network_calls;
  j["input_tokens"] = s.input_tokens;
  j["output_tokens"] = s.output_tokens;
  j["estimated_cost_usd"] = s.estimated_cost_usd;
  Json mf = Json::object();
  for (const auto& [k, v] : s.missing_fraction) {
    if (v > 0.0) mf[k] = v;
  }
  j["missing_fraction"] = std::move(mf);
  j["invalid_instances"] = s.invalid_instances;
  return j;
}

std::vector<RatingRecord> RunResult::records() const {
  std::vector<RatingRecord> out;
  for (const auto& s : samples) {
    if (s.status == SampleStatus::kOk && s.rating) {
      out.push_back(RatingRecord{std::to_string(s.sample_index), s.coords,
                                 *s.rating, Source::kModel});
    }
  }
  return out;
}

namespace {

struct Job {
  std::size_t instance = 0;
  int sample = 0;
  std::string key;
};

struct JobResult {
  SampleOutcome outcome;
  long long input_tokens = 0;
  long long output_tokens = 0;
};

CompletionResult complete_with_backoff(ProviderClient& client,
                                       const CompletionRequest& req,
                                       const RunConfig& config,
                                       TokenBucket& bucket) {
  for (int attempt = 0;; ++attempt) {
    bucket.acquire();
    try {
      return client.complete(req);
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= config.transport_retries) throw;
      std::this_thread::sleep_for(config.backoff_base * (1LL << attempt));
    }
  }
}

JobResult run_job(const Job& job, const PromptInstance& inst,
                  ProviderClient& client, const RunConfig& config,
                  const ResponseCache& cache, TokenBucket& bucket) {
  JobResult res;
  res.outcome.coords = inst.coords;
  res.outcome.condition = inst.condition;
  res.outcome.sample_index = job.sample;

  SampleRecord rec;
  if (auto hit = cache.load(job.key)) {
    rec = std::move(*hit);
    if (rec.is_final(config.max_parse_retries)) {
      res.outcome.cache_hit = true;
      res.outcome.rating = rec.parsed;
      res.outcome.status =
          rec.parsed ? SampleStatus::kOk : SampleStatus::kMissing;
      return res;
    }
  } else {
    rec.prompt_key = job.key;
    rec.provider_model_id = config.provider_model_id;
  }

  while (!rec.is_final(config.max_parse_retries)) {
    CompletionRequest req{inst.text, config.temperature, job.sample,
                          rec.attempts};
    CompletionResult completion;
    try {
      completion = complete_with_backoff(client, req, config, bucket);
    } catch (const Error& e) {
      res.outcome.status = SampleStatus::kFailed;
      res.outcome.error = e.what();
      return res;
    }
    rec.raw_texts.push_back(completion.text);
    ++rec.attempts;
    rec.input_tokens += completion.input_tokens;
    rec.output_tokens += completion.output_tokens;
    res.input_tokens += completion.input_tokens;
    res.output_tokens += completion.output_tokens;
    rec.timestamp = now_iso8601();
    cache.store(rec);  // raw text persisted before parsing
    rec.parsed = parse_likert(completion.text);
    if (rec.parsed) cache.store(rec);
  }
  res.outcome.rating = rec.parsed;
  res.outcome.status = rec.parsed ? SampleStatus::kOk : SampleStatus::kMissing;
  return res;
}

}  // namespace

RunResult run_plan(std::span<const PromptInstance> plan,
                   ProviderClient& client, const RunConfig& config_in,
                   const ResponseCache& cache) {
  RunConfig config = config_in;
  if (config.provider_model_id.empty()) {
    config.provider_model_id = client.provider_name() + ":" + client.model_id();
  }
  config.validate();

  std::vector<Job> jobs;
  jobs.reserve(plan.size() * static_cast<std::size_t>(config.samples_per_query));
  for (std::size_t i = 0; i < plan.size(); ++i) {
    for (int s = 0; s < config.samples_per_query; ++s) {
      jobs.push_back(Job{i, s,
                         cache_key(config.provider_model_id, plan[i].text,
                                   config.temperature, s)});
    }
  }

  if (client.replay_only()) {
    std::vector<std::string> missing;
    for (const auto& job : jobs) {
      auto hit = cache.load(job.key);
      if (!hit || !hit->is_final(config.max_parse_retries)) {
        missing.push_back(job.key);
      }
    }
    if (!missing.empty()) {
      std::string msg = "replay cache miss for " +
                        std::to_string(missing.size()) + " sample(s):";
      for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
        msg += " " + missing[i];
      }
      if (missing.size() > 20) msg += " ...";
      throw Error(msg);
    }
  }

  const long long calls_before = client.calls();
  std::vector<JobResult> results(jobs.size());
  TokenBucket bucket(config.requests_per_minute);
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      const std::size_t idx = next++;
      if (idx >= jobs.size()) return;
      try {
        results[idx] = run_job(jobs[idx], plan[jobs[idx].instance], client,
                               config, cache, bucket);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next = jobs.size();
        return;
      }
    }
  };
  const int threads = std::min<int>(config.max_concurrency,
                                    static_cast<int>(std::max<std::size_t>(
                                        1, jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  RunResult out;
  RunSummary& sum = out.summary;
  sum.instances = plan.size();
  sum.sample_slots = jobs.size();
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_instance;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& r = results[i];
    const auto& inst = plan[jobs[i].instance];
    const std::string label =
        to_string(inst.coords) + "/" + std::string(to_string(inst.condition));
    auto& [bad, total] = per_instance[label];
    ++total;
    switch (r.outcome.status) {
      case SampleStatus::kOk: ++sum.parsed; break;
      case SampleStatus::kMissing: ++sum.missing; ++bad; break;
      case SampleStatus::kFailed: ++sum.failed; ++bad; break;
    }
    if (r.outcome.cache_hit) ++sum.cache_hits;
    sum.input_tokens += r.input_tokens;
    sum.output_tokens += r.output_tokens;
    out.samples.push_back(std::move(r.outcome));
  }
  for (const auto& [label, bt] : per_instance) {
    const double frac =
        static_cast<double>(bt.first) / static_cast<double>(bt.second);
    sum.missing_fraction[label] = frac;
    if (frac > kMaxMissingFraction) sum.invalid_instances.push_back(label);
  }
  sum.network_calls = client.calls() - calls_before;
  sum.estimated_cost_usd =
      (static_cast<double>(sum.input_tokens) * config.input_price_per_mtok +
       static_cast<double>(sum.output_tokens) * config.output_price_per_mtok) /
      1e6;
  return out;
}

std::string ratings_jsonl(const RunResult& result, std::string_view model_id) {
  std::string out;
  for (const auto& s : result.samples) {
    Json j{{"rater_id", std::to_string(s.sample_index)},
           {"scenario", s.coords.scenario},
           {"context", to_string(s.coords.context)},
           {"form", to_string(s.coords.form)},
           {"attribute", to_string(s.coords.attribute)},
           {"rating", s.rating ? Json(*s.rating) : Json(nullptr)},
           {"source", "model"},
           {"condition", to_string(s.condition)},
           {"model", model_id},
           {"status", to_string(s.status)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace smeval
