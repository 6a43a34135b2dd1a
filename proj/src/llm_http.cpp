// Copyright 2026 The crashtriage Authors.
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
#include "httplib.h"

#include "crashtriage/error.hpp"
#include "crashtriage/llm.hpp"

namespace crashtriage {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing '/'
};

SplitUrl Split(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint lacks a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {}

nlohmann::json HttpBackend::RequestBody(const LlmRequest& request) const {
  return {{"model", config_.model},
          {"messages",
           nlohmann::json::array(
               {{{"role", "system"}, {"content", request.system_prompt}},
                {{"role", "user"}, {"content", request.user_prompt}}})},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_tokens}};
}

LlmResponse HttpBackend::Complete(const LlmRequest& request) {
  auto url = Split(config_.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  auto res = client.Post(url.path + "/chat/completions", headers,
                         RequestBody(request).dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendUnavailable,
                "request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                "HTTP " + std::to_string(res->status) + ": " +
                    res->body.substr(0, 512));
  }

  LlmResponse out;
  out.backend_id = Id();
  try {
    auto body = nlohmann::json::parse(res->body);
    const auto& choice = body.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : "";
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      out.finish_reason = choice["finish_reason"].get<std::string>();
    }
    if (body.contains("usage")) {
      out.prompt_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
      out.completion_tokens =
          body["usage"].value("completion_tokens", std::int64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable,
                std::string("unexpected response body: ") + e.what());
  }
  return out;
}

}  // namespace crashtriage
