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

// The triage state machine.
//
//   identify crash variable
//     -> taint step (prompt, parse, format if needed, verify, retry)
//        -> hop to caller / hop within function -> taint step ...
//        -> sink: blame the step's function
//
// Planning is fixed; the model only executes single steps. Every prompt is
// built from the current task's JSON intermediate result and retrieved
// source, never from earlier replies.

#ifndef CRASHTRIAGE_AGENT_HPP_
#define CRASHTRIAGE_AGENT_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashtriage/esv.hpp"
#include "crashtriage/llm.hpp"
#include "crashtriage/pcx.hpp"
#include "crashtriage/report.hpp"
#include "crashtriage/retrieval.hpp"

namespace crashtriage {

struct AgentConfig {
  TemperatureSchedule schedule;
  int retry_cap = 10;  // re-analyses after the first attempt
  int max_depth = 24;
  // false disables execution verification; replies are taken as printed.
  bool verification = true;
  int max_output_tokens = 4096;
  int identify_attempts = 2;
  std::string taint_program = "backward_taint.v1";
  std::string stack_program = "backward_taint_stack.v1";
  std::string identify_program = "identify_crash_variable.v1";

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults. Throws Error{kInvalidArgument}.
  static AgentConfig FromJson(const nlohmann::json& j);
};

enum class Resolution {
  kNone,
  kSinkConstant,
  kSinkGlobal,
  kSinkReturnValue,
  kSinkStructField,
  kSinkStackVariable,
  kHopToCaller,
  kHopAssignment,
};

std::string_view ResolutionName(Resolution r);
std::optional<Resolution> ResolutionForCategory(std::string_view category);
bool IsSink(Resolution r);

struct TaintStep {
  TaintTask task;
  ExecutionOutcome outcome;  // last attempt
  bool verified = false;
  Resolution resolution = Resolution::kNone;
  std::optional<TaintTask> next;
  int attempts_used = 0;
  std::vector<double> temperatures;
  std::vector<Violation> violations_seen;

  nlohmann::json ToJson() const;
};

enum class TriageStatus {
  kVerified,
  kExhaustedRetries,
  kDepthLimited,
  kRetrievalFailed,
};

std::string_view TriageStatusName(TriageStatus s);
std::optional<TriageStatus> TriageStatusFromName(std::string_view name);

struct TriageResult {
  std::string blamed_function;
  std::optional<std::string> blamed_file;
  // Set when the blame is a fallback rather than a verified sink.
  bool blame_flagged = false;
  std::string note;
  std::string bug_category;
  std::string program_id;
  std::optional<TaintTask> crash_task;
  int identify_attempts = 0;
  std::vector<TaintStep> chain;
  int total_executions = 0;
  int total_violations = 0;
  std::map<ViolationClass, int> violations_by_class;
  TokenReport tokens;
  TriageStatus status = TriageStatus::kVerified;

  // triage.v1; contains no timestamps.
  nlohmann::json ToJson() const;
};

// Per-run state. Never shared between runs.
struct Session {
  const CrashReport* report = nullptr;
  const PseudoProgram* program = nullptr;
  const ExecutionSpec* spec = nullptr;
  TokenLedger ledger;
  int identify_attempts = 0;
  std::vector<nlohmann::json> audit;  // audit.v1 events
};

class Triager {
 public:
  // `index` and `backend` must outlive the triager. Throws
  // Error{kProgramInvalid} or Error{kSpecInvalid} when the program set is
  // incomplete or a program disagrees with its spec.
  Triager(const SourceIndex& index, Backend& backend,
          std::map<std::string, PseudoProgram> programs,
          std::map<std::string, ExecutionSpec> specs, AgentConfig config = {});

  const AgentConfig& config() const { return config_; }

  // Runs one full triage. Backend failures propagate as Error; analysis
  // failures end up in the result status. `audit` receives audit.v1 events.
  TriageResult Triage(const CrashReport& report,
                      std::vector<nlohmann::json>* audit = nullptr) const;

  // Both throw Error{kRetrievalFailed}; the first also
  // Error{kVariableUnidentified}.
  TaintTask IdentifyCrashVariable(Session& session) const;
  TaintStep RunTaintStep(const TaintTask& task, Session& session) const;

  // Program and spec used for a report: the stack variant for
  // stack-out-of-bounds, otherwise the default.
  const PseudoProgram& ProgramFor(const CrashReport& report) const;
  const ExecutionSpec& SpecFor(const PseudoProgram& program) const;

  // Re-runs the verifier over a stored audit log and compares the result
  // with the recorded violations.
  nlohmann::json ReplayVerify(const std::vector<nlohmann::json>& audit) const;

 private:
  SourceMap PromptSources(const TaintTask& task, const CrashReport& report) const;
  VerificationContext ContextFor(const TaintTask& task,
                                 const ExecutionOutcome& outcome,
                                 const SourceMap& prompt_sources,
                                 const CrashReport& report) const;

  const SourceIndex& index_;
  Backend& backend_;
  std::map<std::string, PseudoProgram> programs_;
  std::map<std::string, ExecutionSpec> specs_;
  AgentConfig config_;
};

enum class Correctness { kFunction, kCallee, kRelated, kWrong };

std::string_view CorrectnessName(Correctness c);
std::optional<Correctness> CorrectnessFromName(std::string_view name);

struct PatchedFunction {
  std::string name;
  std::string file;
};

struct PatchTruth {
  std::string bug_id;
  std::vector<PatchedFunction> patched_functions;

  static PatchTruth FromJson(const nlohmann::json& j);
};

// Throws Error{kGroundTruthMissing} when `truth` lists no functions.
Correctness ClassifyCorrectness(std::string_view blamed_function,
                                std::optional<std::string> blamed_file,
                                const PatchTruth& truth,
                                const SourceIndex& index);

inline Correctness ClassifyCorrectness(const TriageResult& result,
                                       const PatchTruth& truth,
                                       const SourceIndex& index) {
  return ClassifyCorrectness(result.blamed_function, result.blamed_file, truth,
                             index);
}

}  // namespace crashtriage

#endif  // CRASHTRIAGE_AGENT_HPP_
