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

#include "crashtriage/llm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "crashtriage/error.hpp"
#include "crashtriage/text.hpp"

namespace crashtriage {

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kPseudoExec: return "pseudo_exec";
    case Phase::kFormat: return "format";
    case Phase::kIdentifyVariable: return "identify_variable";
  }
  return "pseudo_exec";
}

std::optional<Phase> PhaseFromName(std::string_view name) {
  for (auto p : {Phase::kPseudoExec, Phase::kFormat, Phase::kIdentifyVariable}) {
    if (PhaseName(p) == name) return p;
  }
  return std::nullopt;
}

std::string LlmRequest::PromptSha256() const {
  return text::Sha256Hex(system_prompt + '\x1f' + user_prompt);
}

double TemperatureSchedule::TemperatureFor(int attempt) const {
  double t = std::min(base + std::max(attempt, 0) * step, cap);
  return std::round(t * 1e9) / 1e9;
}

double TokenReport::RetryRatio() const {
  auto all = total.total();
  return all == 0 ? 0.0
                  : static_cast<double>(retry.total()) / static_cast<double>(all);
}

nlohmann::json TokenReport::ToJson() const {
  auto tokens = [](const PhaseTokens& t) {
    return nlohmann::json{{"prompt_tokens", t.prompt_tokens},
                          {"completion_tokens", t.completion_tokens},
                          {"total", t.total()}};
  };
  nlohmann::json by_phase = nlohmann::json::object();
  for (const auto& [p, t] : phases) by_phase[std::string(PhaseName(p))] = tokens(t);
  return {{"phases", std::move(by_phase)},
          {"total", tokens(total)},
          {"retry", tokens(retry)},
          {"calls", calls},
          {"retry_ratio", RetryRatio()}};
}

void TokenLedger::Record(Phase phase, std::int64_t prompt_tokens,
                         std::int64_t completion_tokens, bool retry) {
  std::lock_guard lock(mu_);
  entries_.push_back({phase, std::max<std::int64_t>(prompt_tokens, 0),
                      std::max<std::int64_t>(completion_tokens, 0), retry});
}

TokenReport TokenLedger::Report() const {
  std::lock_guard lock(mu_);
  TokenReport r;
  for (const auto& e : entries_) {
    auto& p = r.phases[e.phase];
    p.prompt_tokens += e.prompt_tokens;
    p.completion_tokens += e.completion_tokens;
    r.total.prompt_tokens += e.prompt_tokens;
    r.total.completion_tokens += e.completion_tokens;
    if (e.retry) {
      r.retry.prompt_tokens += e.prompt_tokens;
      r.retry.completion_tokens += e.completion_tokens;
    }
    ++r.calls;
  }
  return r;
}

std::vector<TokenLedger::Entry> TokenLedger::Entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

LlmResponse Complete(Backend& backend, const LlmRequest& request,
                     TokenLedger& ledger) {
  LlmResponse response;
  try {
    response = backend.Complete(request);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable, e.what());
  }
  ledger.Record(request.tag, response.prompt_tokens, response.completion_tokens,
                request.attempt > 0);
  bool truncated = response.finish_reason == "length" ||
                   (response.finish_reason.empty() &&
                    response.completion_tokens >= request.max_output_tokens);
  if (truncated) {
    throw Error(ErrorCode::kResponseTruncated,
                "reply hit max_output_tokens (" +
                    std::to_string(request.max_output_tokens) + ")");
  }
  return response;
}

nlohmann::json CassetteEntry::ToJson() const {
  nlohmann::json match = nlohmann::json::object();
  if (tag) match["tag"] = *tag;
  if (prompt_sha256) match["prompt_sha256"] = *prompt_sha256;
  nlohmann::json j = {{"match", std::move(match)},
                      {"reply", reply},
                      {"prompt_tokens", prompt_tokens},
                      {"completion_tokens", completion_tokens}};
  if (!finish_reason.empty()) j["finish_reason"] = finish_reason;
  return j;
}

CassetteEntry CassetteEntry::FromJson(const nlohmann::json& j) {
  CassetteEntry e;
  if (j.contains("match") && j["match"].is_object()) {
    const auto& m = j["match"];
    if (m.contains("tag") && m["tag"].is_string()) {
      e.tag = m["tag"].get<std::string>();
    }
    if (m.contains("prompt_sha256") && m["prompt_sha256"].is_string()) {
      e.prompt_sha256 = m["prompt_sha256"].get<std::string>();
    }
  }
  e.reply = j.at("reply").get<std::string>();
  e.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  e.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  e.finish_reason = j.value("finish_reason", "");
  return e;
}

std::vector<CassetteEntry> ParseCassette(std::string_view jsonl) {
  std::vector<CassetteEntry> out;
  int n = 0;
  for (const auto& line : text::SplitLines(jsonl)) {
    ++n;
    auto t = text::Trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.push_back(CassetteEntry::FromJson(nlohmann::json::parse(t)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cassette line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CassetteEntry> LoadCassette(const std::string& path) {
  return ParseCassette(text::ReadFile(path));
}

ScriptedBackend::ScriptedBackend(std::vector<CassetteEntry> entries,
                                 bool strict_hash)
    : entries_(std::move(entries)),
      used_(entries_.size(), false),
      strict_hash_(strict_hash) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::FromFile(
    const std::string& path, bool strict_hash) {
  return std::make_unique<ScriptedBackend>(LoadCassette(path), strict_hash);
}

LlmResponse ScriptedBackend::Complete(const LlmRequest& request) {
  const auto tag = std::string(PhaseName(request.tag));
  const auto hash = request.PromptSha256();
  std::lock_guard lock(mu_);
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < entries_.size() && !pick; ++i) {
    if (!used_[i] && entries_[i].tag == tag && entries_[i].prompt_sha256 == hash) {
      pick = i;
    }
  }
  if (!pick) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (used_[i] || (entries_[i].tag && *entries_[i].tag != tag)) continue;
      if (entries_[i].prompt_sha256) {
        if (strict_hash_) {
          throw Error(ErrorCode::kBackendUnavailable,
                      "cassette prompt drift for tag " + tag);
        }
        ++drift_;
      }
      pick = i;
      break;
    }
  }
  if (!pick) {
    throw Error(ErrorCode::kBackendUnavailable,
                "cassette exhausted for tag " + tag);
  }
  used_[*pick] = true;
  const auto& e = entries_[*pick];
  LlmResponse r;
  r.text = e.reply;
  r.prompt_tokens = e.prompt_tokens;
  r.completion_tokens = e.completion_tokens;
  r.backend_id = Id();
  r.finish_reason = e.finish_reason.empty() ? "stop" : e.finish_reason;
  return r;
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count(used_.begin(), used_.end(), false));
}

std::size_t ScriptedBackend::drift_count() const {
  std::lock_guard lock(mu_);
  return drift_;
}

RecordingBackend::RecordingBackend(Backend& inner, std::string cassette_path)
    : inner_(inner), path_(std::move(cassette_path)) {}

LlmResponse RecordingBackend::Complete(const LlmRequest& request) {
  auto response = inner_.Complete(request);
  CassetteEntry e;
  e.tag = std::string(PhaseName(request.tag));
  e.prompt_sha256 = request.PromptSha256();
  e.reply = response.text;
  e.prompt_tokens = response.prompt_tokens;
  e.completion_tokens = response.completion_tokens;
  e.finish_reason = response.finish_reason;
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot append to " + path_);
  out << e.ToJson().dump() << '\n';
  return response;
}

}  // namespace crashtriage
