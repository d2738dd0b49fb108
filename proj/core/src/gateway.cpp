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

#include "gln/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "gln/hash.hpp"
#include "gln/rng.hpp"

namespace gln {

using json = nlohmann::json;
using namespace std::chrono;

std::string_view to_string(GatewayErrc code) {
  switch (code) {
    case GatewayErrc::authentication:
      return "authentication";
    case GatewayErrc::rate_limited:
      return "rate_limited";
    case GatewayErrc::timeout:
      return "timeout";
    case GatewayErrc::unavailable:
      return "unavailable";
    case GatewayErrc::context_overflow:
      return "context_overflow";
    case GatewayErrc::provider:
      return "provider";
    case GatewayErrc::contract_violation:
      return "contract_violation";
    case GatewayErrc::invalid_request:
      return "invalid_request";
    case GatewayErrc::budget_exceeded:
      return "budget_exceeded";
    case GatewayErrc::retries_exhausted:
      return "retries_exhausted";
  }
  return "provider";
}

bool is_retryable(GatewayErrc code) {
  return code == GatewayErrc::rate_limited || code == GatewayErrc::timeout ||
         code == GatewayErrc::unavailable;
}

// --- usage ledger ------------------------------------------------------------

void UsageLedger::record(UsageRecord rec) {
  std::lock_guard lock(mu_);
  records_.push_back(std::move(rec));
}

std::vector<UsageRecord> UsageLedger::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t UsageLedger::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void UsageLedger::write_jsonl(const std::filesystem::path& file) const {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  for (const auto& r : records()) {
    json rec = {{"request_tag", r.request_tag},
                {"model_id", r.model_id},
                {"attempt", r.attempt},
                {"ok", r.ok},
                {"prompt_tokens", r.prompt_tokens},
                {"completion_tokens", r.completion_tokens},
                {"latency_ms", r.latency_ms}};
    if (!r.ok) rec["error"] = r.error;
    out << rec.dump() << '\n';
  }
}

UsageSummary usage_report(const std::vector<UsageRecord>& records) {
  UsageSummary s;
  for (const auto& r : records) {
    ++s.attempts;
    auto& tag = s.by_tag[r.request_tag];
    if (!r.ok) {
      ++s.failed_attempts;
      ++tag.failed_attempts;
      continue;
    }
    ++s.calls;
    s.prompt_tokens += r.prompt_tokens;
    s.completion_tokens += r.completion_tokens;
    ++tag.calls;
    tag.prompt_tokens += r.prompt_tokens;
    tag.completion_tokens += r.completion_tokens;
  }
  for (auto& [_, tag] : s.by_tag) {
    if (tag.calls == 0) continue;
    tag.mean_prompt_tokens =
        static_cast<double>(tag.prompt_tokens) / static_cast<double>(tag.calls);
    tag.mean_completion_tokens =
        static_cast<double>(tag.completion_tokens) / static_cast<double>(tag.calls);
  }
  return s;
}

UsageSummary usage_report(const UsageLedger& ledger) {
  return usage_report(ledger.records());
}

// --- response cache ----------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = json::parse(line, nullptr, /*allow_exceptions=*/false);
    // A torn trailing line from an interrupted run is skipped.
    if (rec.is_discarded()) continue;
    CompletionResponse r;
    r.text = rec.at("text").get<std::string>();
    r.prompt_tokens = rec.at("prompt_tokens").get<std::int64_t>();
    r.completion_tokens = rec.at("completion_tokens").get<std::int64_t>();
    r.model_id = rec.at("model_id").get<std::string>();
    entries_[rec.at("key").get<std::string>()] = std::move(r);
  }
}

std::string ResponseCache::key_for(const CompletionRequest& req,
                                   const std::string& fingerprint) {
  json k = {fingerprint,          req.model_id,
            req.instruction_text, req.content_text,
            req.max_output_tokens, req.temperature};
  return sha256_hex(k.dump());
}

std::optional<CompletionResponse> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const CompletionResponse& resp) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(key, resp).second) return;
  if (file_.empty()) return;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  out << json{{"key", key},
              {"text", resp.text},
              {"prompt_tokens", resp.prompt_tokens},
              {"completion_tokens", resp.completion_tokens},
              {"model_id", resp.model_id}}
             .dump()
      << '\n';
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// --- gateway -----------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions opts,
                 std::shared_ptr<UsageLedger> ledger,
                 std::shared_ptr<ResponseCache> cache)
    : backend_(std::move(backend)),
      caps_(backend_->capabilities()),
      opts_(std::move(opts)),
      ledger_(ledger ? std::move(ledger) : std::make_shared<UsageLedger>()),
      cache_(std::move(cache)),
      in_flight_(std::clamp(opts_.max_in_flight, 1, 1024)),
      bucket_last_(steady_clock::now()) {
  if (opts_.max_attempts < 1) opts_.max_attempts = 1;
}

void Gateway::sleep_for(milliseconds d) {
  if (d <= milliseconds::zero()) return;
  if (opts_.sleep) {
    opts_.sleep(d);
  } else {
    std::this_thread::sleep_for(d);
  }
}

void Gateway::acquire_rate_token() {
  if (opts_.requests_per_minute <= 0.0) return;
  const double rate = opts_.requests_per_minute / 60.0;  // per second
  for (;;) {
    milliseconds wait{0};
    {
      std::lock_guard lock(bucket_mu_);
      const auto now = steady_clock::now();
      const double elapsed = duration<double>(now - bucket_last_).count();
      bucket_last_ = now;
      bucket_tokens_ = std::min(1.0, bucket_tokens_ + elapsed * rate);
      if (bucket_tokens_ >= 1.0) {
        bucket_tokens_ -= 1.0;
        return;
      }
      wait = milliseconds(
          static_cast<std::int64_t>(std::ceil((1.0 - bucket_tokens_) / rate * 1000.0)));
    }
    sleep_for(wait);
  }
}

milliseconds Gateway::backoff_delay(int attempt, const std::string& tag) {
  double ms = static_cast<double>(opts_.base_delay.count()) *
              std::pow(opts_.backoff_factor, attempt - 1);
  ms = std::min(ms, static_cast<double>(opts_.max_delay.count()));
  if (opts_.jitter) {
    Rng rng(static_cast<std::uint64_t>(attempt), "backoff", tag);
    ms *= 0.5 + 0.5 * static_cast<double>(rng.below(1001)) / 1000.0;
  }
  return milliseconds(static_cast<std::int64_t>(ms));
}

CompletionResponse Gateway::complete(const CompletionRequest& input) {
  CompletionRequest req = input;
  if (req.model_id.empty()) req.model_id = default_model_;
  if (req.instruction_text.empty() || req.content_text.empty()) {
    throw GatewayError(GatewayErrc::invalid_request,
                       "instruction and content must be non-empty",
                       req.request_tag);
  }
  if (req.max_output_tokens <= 0 || req.temperature < 0.0) {
    throw GatewayError(GatewayErrc::invalid_request,
                       "max_output_tokens must be positive and temperature >= 0",
                       req.request_tag);
  }

  std::string key;
  if (cache_) {
    key = ResponseCache::key_for(req, caps_.fingerprint);
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      hit->from_cache = true;
      hit->latency_ms = 0;
      return *hit;
    }
  }

  std::string last_error;
  for (int attempt = 1; attempt <= opts_.max_attempts; ++attempt) {
    if (opts_.max_total_tokens > 0 && tokens_used_.load() >= opts_.max_total_tokens) {
      throw GatewayError(GatewayErrc::budget_exceeded,
                         "token budget of " + std::to_string(opts_.max_total_tokens) +
                             " exhausted",
                         req.request_tag);
    }
    if (opts_.max_calls > 0) {
      auto used = attempts_.load();
      do {
        if (used >= opts_.max_calls) {
          throw GatewayError(GatewayErrc::budget_exceeded,
                             "call budget of " + std::to_string(opts_.max_calls) +
                                 " exhausted",
                             req.request_tag);
        }
      } while (!attempts_.compare_exchange_weak(used, used + 1));
    } else {
      ++attempts_;
    }

    acquire_rate_token();
    UsageRecord rec;
    rec.request_tag = req.request_tag;
    rec.model_id = req.model_id;
    rec.attempt = attempt;
    const auto start = steady_clock::now();
    try {
      CompletionResponse resp;
      {
        in_flight_.acquire();
        struct Release {
          std::counting_semaphore<1024>& s;
          ~Release() { s.release(); }
        } release{in_flight_};
        resp = backend_->complete(req);
      }
      resp.latency_ms = duration_cast<milliseconds>(steady_clock::now() - start).count();
      resp.from_cache = false;
      rec.prompt_tokens = resp.prompt_tokens;
      rec.completion_tokens = resp.completion_tokens;
      rec.latency_ms = resp.latency_ms;
      tokens_used_ += resp.prompt_tokens + resp.completion_tokens;
      if (resp.completion_tokens > req.max_output_tokens) {
        rec.ok = false;
        rec.error = "contract_violation";
        ledger_->record(rec);
        throw GatewayError(GatewayErrc::contract_violation,
                           "response of " + std::to_string(resp.completion_tokens) +
                               " tokens exceeds max_output_tokens " +
                               std::to_string(req.max_output_tokens),
                           req.request_tag);
      }
      ledger_->record(rec);
      if (cache_) cache_->put(key, resp);
      return resp;
    } catch (const GatewayError& e) {
      if (e.code() == GatewayErrc::contract_violation) throw;
      rec.ok = false;
      rec.error = std::string(to_string(e.code())) + ": " + e.what();
      rec.latency_ms = duration_cast<milliseconds>(steady_clock::now() - start).count();
      ledger_->record(rec);
      if (!e.retryable()) {
        throw GatewayError(e.code(), e.what(), req.request_tag);
      }
      last_error = rec.error;
    }
    if (attempt < opts_.max_attempts) sleep_for(backoff_delay(attempt, req.request_tag));
  }
  throw GatewayError(GatewayErrc::retries_exhausted,
                     "gave up after " + std::to_string(opts_.max_attempts) +
                         " attempts (request " + req.request_tag + "): " + last_error,
                     req.request_tag);
}

}  // namespace gln
