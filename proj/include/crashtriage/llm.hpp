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

// Language model backends.
//
// Every request is stateless: one system message and one user message, no
// conversation history. Three backends are provided:
//
//   HttpBackend       chat-completions over HTTP(S)
//   ScriptedBackend   replays a cassette (JSON lines) deterministically
//   RecordingBackend  forwards to another backend and appends a cassette
//
// Cassette line:
//   {"match": {"tag": "pseudo_exec", "prompt_sha256": "..."},
//    "reply": "...", "prompt_tokens": 10, "completion_tokens": 5}
//
// A request consumes the first unused entry with the same tag and prompt
// hash. If none exists it falls back to the first unused entry in file
// order whose tag matches (or has no tag); a fallback past an entry that
// carried a different hash counts as prompt drift.

#ifndef CRASHTRIAGE_LLM_HPP_
#define CRASHTRIAGE_LLM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace crashtriage {

enum class Phase { kPseudoExec, kFormat, kIdentifyVariable };

std::string_view PhaseName(Phase phase);
std::optional<Phase> PhaseFromName(std::string_view name);

struct LlmRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  Phase tag = Phase::kPseudoExec;
  // Re-analysis attempt that issued this request; > 0 counts as retry cost.
  int attempt = 0;

  // sha256 over system prompt, a 0x1f separator and the user prompt.
  std::string PromptSha256() const;
};

struct LlmResponse {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string backend_id;
  std::string finish_reason;  // "stop", "length", or empty if unknown
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Implementations must be safe to call from several threads.
  virtual LlmResponse Complete(const LlmRequest& request) = 0;
  virtual std::string Id() const = 0;
};

struct TemperatureSchedule {
  double base = 0.0;
  double step = 0.2;
  double cap = 2.0;

  // min(base + attempt * step, cap), rounded to 1e-9 so that 0.2 * 3 is 0.6.
  double TemperatureFor(int attempt) const;
};

struct PhaseTokens {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  bool operator==(const PhaseTokens&) const = default;
};

struct TokenReport {
  std::map<Phase, PhaseTokens> phases;
  PhaseTokens total;
  PhaseTokens retry;  // spent on re-analysis attempts
  std::int64_t calls = 0;

  // retry.total() / total.total(); 0 when nothing was spent.
  double RetryRatio() const;
  nlohmann::json ToJson() const;
};

// Per-session token accounting. Internally synchronized.
class TokenLedger {
 public:
  struct Entry {
    Phase phase;
    std::int64_t prompt_tokens;
    std::int64_t completion_tokens;
    bool retry;
  };

  void Record(Phase phase, std::int64_t prompt_tokens,
              std::int64_t completion_tokens, bool retry);
  TokenReport Report() const;
  std::vector<Entry> Entries() const;

 private:
  mutable std::mutex mu_;
  std::vector<Entry> entries_;
};

// Sends `request`, records its usage in `ledger` (exactly once, including
// truncated replies) and returns the reply.
// Throws Error{kBackendUnavailable} or Error{kResponseTruncated}.
LlmResponse Complete(Backend& backend, const LlmRequest& request,
                     TokenLedger& ledger);

struct CassetteEntry {
  std::optional<std::string> tag;
  std::optional<std::string> prompt_sha256;
  std::string reply;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string finish_reason;

  nlohmann::json ToJson() const;
  static CassetteEntry FromJson(const nlohmann::json& j);
};

std::vector<CassetteEntry> ParseCassette(std::string_view jsonl);
std::vector<CassetteEntry> LoadCassette(const std::string& path);

class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<CassetteEntry> entries,
                           bool strict_hash = false);
  static std::unique_ptr<ScriptedBackend> FromFile(const std::string& path,
                                                   bool strict_hash = false);

  LlmResponse Complete(const LlmRequest& request) override;
  std::string Id() const override { return "scripted"; }

  std::size_t remaining() const;
  std::size_t drift_count() const;

 private:
  mutable std::mutex mu_;
  std::vector<CassetteEntry> entries_;
  std::vector<bool> used_;
  bool strict_hash_;
  std::size_t drift_ = 0;
};

struct HttpConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string model = "gpt-4-32k";
  int timeout_seconds = 300;
};

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);
  LlmResponse Complete(const LlmRequest& request) override;
  std::string Id() const override { return "http:" + config_.model; }

  // Body sent to <base_url>/chat/completions.
  nlohmann::json RequestBody(const LlmRequest& request) const;

 private:
  HttpConfig config_;
};

class RecordingBackend : public Backend {
 public:
  RecordingBackend(Backend& inner, std::string cassette_path);
  LlmResponse Complete(const LlmRequest& request) override;
  std::string Id() const override { return "record:" + inner_.Id(); }

 private:
  Backend& inner_;
  std::string path_;
  std::mutex mu_;
};

}  // namespace crashtriage

#endif  // CRASHTRIAGE_LLM_HPP_
