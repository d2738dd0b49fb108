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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "gln/gateway.hpp"

namespace gln {

using json = nlohmann::json;

namespace {

std::string default_path(HttpBackend::Flavor flavor) {
  return flavor == HttpBackend::Flavor::anthropic ? "/v1/messages"
                                                  : "/v1/chat/completions";
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

HttpBackend::HttpBackend(Options opts) : opts_(std::move(opts)) {
  if (opts_.path.empty()) opts_.path = default_path(opts_.flavor);
  if (opts_.base_url.empty()) {
    opts_.base_url = opts_.flavor == Flavor::anthropic ? "https://api.anthropic.com"
                                                       : "https://api.openai.com";
  }
  if (!opts_.api_key_env.empty()) {
    if (const char* key = std::getenv(opts_.api_key_env.c_str())) api_key_ = key;
  }
}

BackendCapabilities HttpBackend::capabilities() const {
  return {false, "http:" + opts_.base_url + opts_.path + ":" + opts_.model_id};
}

std::string HttpBackend::encode_request(Flavor flavor, const CompletionRequest& req,
                                        const std::string& model_id) {
  const std::string model = req.model_id.empty() ? model_id : req.model_id;
  json body;
  body["model"] = model;
  body["temperature"] = req.temperature;
  if (flavor == Flavor::anthropic) {
    body["system"] = req.instruction_text;
    body["messages"] = json::array({{{"role", "user"}, {"content", req.content_text}}});
    body["max_tokens"] = req.max_output_tokens;
  } else {
    body["messages"] = json::array({{{"role", "system"}, {"content", req.instruction_text}},
                                    {{"role", "user"}, {"content", req.content_text}}});
    body["max_tokens"] = req.max_output_tokens;
  }
  return body.dump();
}

CompletionResponse HttpBackend::decode_response(Flavor flavor, const std::string& body) {
  const auto doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw GatewayError(GatewayErrc::provider, "unparseable provider response");
  }
  CompletionResponse resp;
  try {
    if (flavor == Flavor::anthropic) {
      for (const auto& block : doc.at("content")) {
        if (block.value("type", "") == "text") resp.text += block.at("text").get<std::string>();
      }
      resp.prompt_tokens = doc.at("usage").at("input_tokens").get<std::int64_t>();
      resp.completion_tokens = doc.at("usage").at("output_tokens").get<std::int64_t>();
    } else {
      const auto& content = doc.at("choices").at(0).at("message").at("content");
      resp.text = content.is_string() ? content.get<std::string>() : std::string();
      resp.prompt_tokens = doc.at("usage").at("prompt_tokens").get<std::int64_t>();
      resp.completion_tokens = doc.at("usage").at("completion_tokens").get<std::int64_t>();
    }
    resp.model_id = doc.value("model", "");
  } catch (const json::exception& e) {
    throw GatewayError(GatewayErrc::provider,
                       std::string("provider response missing fields: ") + e.what());
  }
  return resp;
}

GatewayErrc HttpBackend::classify_status(int status, const std::string& body) {
  if (status == 401 || status == 403) return GatewayErrc::authentication;
  if (status == 429) return GatewayErrc::rate_limited;
  if (status == 408 || status == 504) return GatewayErrc::timeout;
  if (status >= 500) return GatewayErrc::unavailable;
  const auto text = lower(body);
  if (text.find("context_length") != std::string::npos ||
      text.find("context length") != std::string::npos ||
      text.find("context window") != std::string::npos ||
      text.find("too long") != std::string::npos) {
    return GatewayErrc::context_overflow;
  }
  return GatewayErrc::provider;
}

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
  if (api_key_.empty()) {
    throw GatewayError(GatewayErrc::authentication,
                       "no API key in environment variable '" + opts_.api_key_env + "'",
                       req.request_tag);
  }
  httplib::Client client(opts_.base_url);
  client.set_connection_timeout(opts_.timeout);
  client.set_read_timeout(opts_.timeout);
  client.set_write_timeout(opts_.timeout);

  httplib::Headers headers;
  if (opts_.flavor == Flavor::anthropic) {
    headers.emplace("x-api-key", api_key_);
    headers.emplace("anthropic-version", "2023-06-01");
  } else {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  const auto payload = encode_request(opts_.flavor, req, opts_.model_id);
  auto res = client.Post(opts_.path, headers, payload, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto code = (err == httplib::Error::Read || err == httplib::Error::Write ||
                       err == httplib::Error::ConnectionTimeout)
                          ? GatewayErrc::timeout
                          : GatewayErrc::unavailable;
    throw GatewayError(code, "transport error: " + httplib::to_string(err),
                       req.request_tag);
  }
  if (res->status != 200) {
    const auto code = classify_status(res->status, res->body);
    std::string msg = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
    if (code == GatewayErrc::context_overflow) msg = "context overflow: " + msg;
    throw GatewayError(code, msg, req.request_tag);
  }
  auto resp = decode_response(opts_.flavor, res->body);
  if (resp.model_id.empty()) resp.model_id = req.model_id.empty() ? opts_.model_id : req.model_id;
  return resp;
}

}  // namespace gln
