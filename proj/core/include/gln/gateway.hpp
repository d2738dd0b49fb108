// Copyright 2026 The GLN Authors
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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gln {

struct CompletionRequest {
  std::string instruction_text;
  std::string content_text;
  int max_output_tokens = 1024;
  double temperature = 0.0;
  std::string model_id;
  std::string request_tag;
};

struct CompletionResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string model_id;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
};

enum class GatewayErrc {
  authentication,
  rate_limited,
  timeout,
  unavailable,
  context_overflow,
  provider,
  contract_violation,
  invalid_request,
  budget_exceeded,
  retries_exhausted,
};

std::string_view to_string(GatewayErrc code);
bool is_retryable(GatewayErrc code);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrc code, const std::string& what,
               std::string request_tag = {})
      : std::runtime_error(what), code_(code), tag_(std::move(request_tag)) {}
  GatewayErrc code() const noexcept { return code_; }
  const std::string& request_tag() const noexcept { return tag_; }
  bool retryable() const noexcept { return is_retryable(code_); }

 private:
  GatewayErrc code_;
  std::string tag_;
};

struct BackendCapabilities {
  // Prompt builders embed node identity markers only when this is set.
  bool node_markers = false;
  // Identifies the backend and model in cache keys.
  std::string fingerprint;
};

// A chat-completion provider. Implementations must be callable from several
// threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& req) = 0;
  virtual BackendCapabilities capabilities() const = 0;
};

// Deterministic offline backend. The reply is a pure function of
// (instruction_text, content_text):
//
//   MOCK-LLM v1
//   SRC:<digest>        one per source found in content, first-occurrence
//                       order; a source is a marker ⟦node:<id>⟧ (digest =
//                       short_digest(id)) or an existing SRC:<digest> token
//   <body>              first sentence of content_text, source tokens
//                       removed, truncated to 40 words
//
// With answer_mode == hash and a "Valid choices: a | b | ..." line in the
// content, a final "ANSWER: <choice>" line picks a choice by content hash.
class MockBackend final : public Backend {
 public:
  enum class AnswerMode { none, hash };

  struct Options {
    AnswerMode answer_mode = AnswerMode::none;
    // 0 = unbounded. Counted in whitespace-delimited words.
    std::int64_t context_window = 0;
    std::string model_id = "mock";
  };

  MockBackend() = default;
  explicit MockBackend(Options opts) : opts_(std::move(opts)) {}

  CompletionResponse complete(const CompletionRequest& req) override;
  BackendCapabilities capabilities() const override;

  static constexpr std::string_view kHeader = "MOCK-LLM v1";
  static std::string marker(std::string_view node_id);
  // Digests of all SRC: lines in a mock reply, in order.
  static std::vector<std::string> source_digests(std::string_view text);

 private:
  Options opts_;
};

// Test double: replies come from a callback.
class ScriptedBackend final : public Backend {
 public:
  using Script = std::function<std::string(const CompletionRequest&)>;

  explicit ScriptedBackend(Script script, std::string fingerprint = "scripted")
      : script_(std::move(script)), fingerprint_(std::move(fingerprint)) {}

  CompletionResponse complete(const CompletionRequest& req) override;
  BackendCapabilities capabilities() const override {
    return {false, fingerprint_};
  }
  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  Script script_;
  std::string fingerprint_;
  std::atomic<std::size_t> calls_{0};
};

// Fails the first `failures` calls with `code`, then delegates.
class FaultInjectingBackend final : public Backend {
 public:
  FaultInjectingBackend(std::shared_ptr<Backend> inner, std::size_t failures,
                        GatewayErrc code = GatewayErrc::unavailable)
      : inner_(std::move(inner)), remaining_(failures), code_(code) {}

  CompletionResponse complete(const CompletionRequest& req) override;
  BackendCapabilities capabilities() const override {
    return inner_->capabilities();
  }

 private:
  std::shared_ptr<Backend> inner_;
  std::atomic<std::size_t> remaining_;
  GatewayErrc code_;
};

// JSON chat-completion over HTTP(S).
class HttpBackend final : public Backend {
 public:
  enum class Flavor { openai, anthropic };

  struct Options {
    Flavor flavor = Flavor::openai;
    // Scheme and host, e.g. "https://api.openai.com".
    std::string base_url;
    // Request path; defaults per flavor when empty.
    std::string path;
    std::string model_id;
    // Name of the environment variable that holds the API key.
    std::string api_key_env;
    std::chrono::seconds timeout{60};
  };

  explicit HttpBackend(Options opts);

  CompletionResponse complete(const CompletionRequest& req) override;
  BackendCapabilities capabilities() const override;

  // Wire helpers, exposed for tests.
  static std::string encode_request(Flavor flavor, const CompletionRequest& req,
                                    const std::string& model_id);
  static CompletionResponse decode_response(Flavor flavor,
                                            const std::string& body);
  static GatewayErrc classify_status(int status, const std::string& body);

 private:
  Options opts_;
  std::string api_key_;
};

// One record per backend attempt.
struct UsageRecord {
  std::string request_tag;
  std::string model_id;
  int attempt = 1;
  bool ok = true;
  std::string error;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
};

class UsageLedger {
 public:
  void record(UsageRecord rec);
  std::vector<UsageRecord> records() const;
  std::size_t size() const;
  void write_jsonl(const std::filesystem::path& file) const;

 private:
  mutable std::mutex mu_;
  std::vector<UsageRecord> records_;
};

struct TagUsage {
  std::size_t calls = 0;
  std::size_t failed_attempts = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double mean_prompt_tokens = 0.0;
  double mean_completion_tokens = 0.0;
};

struct UsageSummary {
  std::size_t attempts = 0;
  std::size_t calls = 0;  // successful attempts
  std::size_t failed_attempts = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::map<std::string, TagUsage> by_tag;
};

// Totals and per-tag means over successful attempts.
UsageSummary usage_report(const UsageLedger& ledger);
UsageSummary usage_report(const std::vector<UsageRecord>& records);

// Successful responses keyed by request content. Persisted as JSONL.
class ResponseCache {
 public:
  ResponseCache() = default;  // memory only
  explicit ResponseCache(std::filesystem::path file);

  static std::string key_for(const CompletionRequest& req,
                             const std::string& fingerprint);

  std::optional<CompletionResponse> get(const std::string& key) const;
  void put(const std::string& key, const CompletionResponse& resp);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::filesystem::path file_;
  std::unordered_map<std::string, CompletionResponse> entries_;
};

struct GatewayOptions {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_delay{30000};
  bool jitter = true;
  // 0 = no client-side rate limit.
  double requests_per_minute = 0.0;
  int max_in_flight = 4;
  // 0 = unlimited. Calls count backend attempts.
  std::size_t max_calls = 0;
  std::int64_t max_total_tokens = 0;
  // Replaced in tests to avoid real waits.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Retrying, rate-limited, budget-guarded access to one backend.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions opts = {},
          std::shared_ptr<UsageLedger> ledger = nullptr,
          std::shared_ptr<ResponseCache> cache = nullptr);

  CompletionResponse complete(const CompletionRequest& req);

  BackendCapabilities capabilities() const { return caps_; }
  const std::string& default_model() const { return default_model_; }
  void set_default_model(std::string model) { default_model_ = std::move(model); }

  UsageLedger& ledger() { return *ledger_; }
  const UsageLedger& ledger() const { return *ledger_; }
  std::shared_ptr<UsageLedger> ledger_ptr() const { return ledger_; }

  std::size_t attempts() const noexcept { return attempts_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  void acquire_rate_token();
  void sleep_for(std::chrono::milliseconds d);
  std::chrono::milliseconds backoff_delay(int attempt, const std::string& tag);

  std::shared_ptr<Backend> backend_;
  BackendCapabilities caps_;
  GatewayOptions opts_;
  std::shared_ptr<UsageLedger> ledger_;
  std::shared_ptr<ResponseCache> cache_;
  std::string default_model_;

  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::size_t> attempts_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::int64_t> tokens_used_{0};

  std::mutex bucket_mu_;
  double bucket_tokens_ = 1.0;
  std::chrono::steady_clock::time_point bucket_last_;
};

}  // namespace gln
