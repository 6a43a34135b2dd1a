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

// Pseudo-code execution prompts and the parsing of their replies.
//
// A program file has three sections separated by lines holding only "%%",
// preceded by a front matter block between "---" lines:
//
//   ---
//   # comment
//   id: backward_taint.v1
//   kind: pseudo_exec            (or: natural)
//   spec_ref: backward_taint.v1
//   accepted_categories: parameter of function, constant value
//   ---
//   <preamble, sent as the system prompt>
//   %%
//   <template with {placeholders}>
//   %%
//   <output instruction>
//
// Placeholders: {variable} {function_name} {bug_category} {call_trace}
// {source_code} {hint_line} {crash_line} {title}.

#ifndef CRASHTRIAGE_PCX_HPP_
#define CRASHTRIAGE_PCX_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashtriage/llm.hpp"
#include "crashtriage/report.hpp"
#include "crashtriage/retrieval.hpp"

namespace crashtriage {

enum class ProgramKind { kPseudoExec, kNatural };

struct PseudoProgram {
  std::string id;
  ProgramKind kind = ProgramKind::kPseudoExec;
  std::string preamble;
  std::string template_text;
  std::string output_instruction;
  std::vector<std::string> accepted_categories;
  std::string spec_ref;  // empty for natural-language programs

  // Distinct placeholder names in template order.
  std::vector<std::string> Placeholders() const;
};

// Throws Error{kProgramInvalid}.
PseudoProgram ParseProgram(std::string_view text);
PseudoProgram LoadProgram(const std::string& path);
// Every *.prog file in `dir`, keyed by id.
std::map<std::string, PseudoProgram> LoadProgramDir(const std::string& dir);

using Bindings = std::map<std::string, std::string, std::less<>>;

// Single pass: substituted text is never rescanned. A placeholder that is
// unbound or bound to an empty string throws Error{kMissingBinding}.
std::string RenderTemplate(std::string_view tmpl, const Bindings& bindings);

enum class TaskOrigin { kCrashSite, kParameterHop, kAssignmentHop };

std::string_view TaskOriginName(TaskOrigin origin);
std::optional<TaskOrigin> TaskOriginFromName(std::string_view name);

struct TaintTask {
  std::string variable;
  std::string function;
  std::optional<int> hint_line;
  TaskOrigin origin = TaskOrigin::kCrashSite;
  int depth = 0;

  bool operator==(const TaintTask&) const = default;

  nlohmann::json ToJson() const;
  static TaintTask FromJson(const nlohmann::json& j);
};

using SourceMap = std::map<std::string, RetrievedSource>;

// The user prompt holds, in order: the task statement with the task JSON,
// the program template, the annotated sources (task.function first) and the
// output instruction.
// Throws Error{kMissingBinding} or Error{kMissingSource}.
LlmRequest BuildPrompt(const PseudoProgram& program, const TaintTask& task,
                       const SourceMap& sources, const CrashReport& report);

struct PrintRecord {
  std::string category;
  std::map<std::string, std::string> fields;
  std::vector<std::string> source_span;

  bool operator==(const PrintRecord&) const = default;

  // Field value, or nullopt when absent or blank.
  std::optional<std::string> Get(std::string_view name) const;
  nlohmann::json ToJson() const;
  static PrintRecord FromJson(const nlohmann::json& j);
};

struct ExecutionOutcome {
  std::string program_id;
  std::string spec_ref;
  std::vector<std::string> steps;
  std::vector<PrintRecord> records;
  bool has_json = false;
  bool needs_format_fallback = false;
  bool formatted = false;  // records came from the formatter pass
  std::string raw;
  int attempt = 0;
  double temperature = 0.0;

  // The record that decides the step: the last one printed.
  const PrintRecord* Primary() const;
  // outcome.v1
  nlohmann::json Normalized() const;
};

// Total: never throws.
ExecutionOutcome ParseOutcome(std::string_view raw,
                              const PseudoProgram& program);

// Replaces the outcome's records with those carried by an outcome.v1 (or a
// flat) JSON object.
void ApplyJson(ExecutionOutcome& outcome, const nlohmann::json& j);

// JSON object embedded in `text`: the last fenced block, else the whole text.
std::optional<nlohmann::json> ExtractJsonObject(std::string_view text);

// Field names the print grammar recognises, in canonical case.
const std::vector<std::string>& PrintFieldNames();

// Example JSON structure given to the formatter for taint outcomes.
std::string OutcomeSchemaExample();

// Asks the backend (tag=format) to restate `raw` as JSON of the given
// structure. One retry on a non-JSON reply, then Error{kFormatFailed}.
nlohmann::json FormatFallback(std::string_view raw,
                              std::string_view schema_example,
                              Backend& backend, TokenLedger& ledger,
                              int attempt);

}  // namespace crashtriage

#endif  // CRASHTRIAGE_PCX_HPP_
