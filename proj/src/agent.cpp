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

#include "crashtriage/agent.hpp"

#include <algorithm>
#include <set>

#include "crashtriage/error.hpp"
#include "crashtriage/text.hpp"

namespace crashtriage {
namespace {

constexpr std::string_view kIdentifySchema =
    R"({"variable": "<variable name>", "line": <line number>})";

nlohmann::json OptionalJson(const std::optional<std::string>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

Violation Synthetic(ViolationClass cls, std::string rule, std::string detail) {
  Violation v;
  v.cls = cls;
  v.rule_id = std::move(rule);
  v.detail = std::move(detail);
  return v;
}

nlohmann::json ViolationsJson(const std::vector<Violation>& vs) {
  auto out = nlohmann::json::array();
  for (const auto& v : vs) out.push_back(v.ToJson());
  return out;
}

nlohmann::json RecordsJson(const std::vector<PrintRecord>& records) {
  auto out = nlohmann::json::array();
  for (const auto& r : records) {
    out.push_back({{"category", r.category}, {"fields", r.fields}});
  }
  return out;
}

std::optional<std::size_t> FrameOf(const CrashReport& report,
                                   std::string_view name) {
  if (auto i = FindFrame(report, name, report.crash_frame_index)) return i;
  return FindFrame(report, name, 0);
}

bool SharesModule(std::string_view a, std::string_view b) {
  auto pa = text::Split(a, '/');
  auto pb = text::Split(b, '/');
  return pa.size() >= 2 && pb.size() >= 2 && pa[0] == pb[0] && pa[1] == pb[1];
}

}  // namespace

nlohmann::json AgentConfig::ToJson() const {
  return {{"temperature",
           {{"base", schedule.base}, {"step", schedule.step}, {"cap", schedule.cap}}},
          {"retry_cap", retry_cap},
          {"max_depth", max_depth},
          {"verification", verification},
          {"max_output_tokens", max_output_tokens},
          {"identify_attempts", identify_attempts},
          {"programs",
           {{"taint", taint_program},
            {"stack", stack_program},
            {"identify", identify_program}}}};
}

AgentConfig AgentConfig::FromJson(const nlohmann::json& j) {
  AgentConfig c;
  try {
    if (j.contains("temperature")) {
      const auto& t = j["temperature"];
      c.schedule.base = t.value("base", c.schedule.base);
      c.schedule.step = t.value("step", c.schedule.step);
      c.schedule.cap = t.value("cap", c.schedule.cap);
    }
    c.retry_cap = j.value("retry_cap", c.retry_cap);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.verification = j.value("verification", c.verification);
    c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
    c.identify_attempts = j.value("identify_attempts", c.identify_attempts);
    if (j.contains("programs")) {
      const auto& p = j["programs"];
      c.taint_program = p.value("taint", c.taint_program);
      c.stack_program = p.value("stack", c.stack_program);
      c.identify_program = p.value("identify", c.identify_program);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("agent config: ") + e.what());
  }
  if (c.retry_cap < 0) throw Error(ErrorCode::kInvalidArgument, "retry_cap must be >= 0");
  if (c.max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be >= 1");
  if (c.max_output_tokens < 1 || c.identify_attempts < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_output_tokens and identify_attempts must be positive");
  }
  if (c.schedule.step < 0 || c.schedule.cap < c.schedule.base) {
    throw Error(ErrorCode::kInvalidArgument, "temperature schedule must not decrease");
  }
  return c;
}

std::string_view ResolutionName(Resolution r) {
  switch (r) {
    case Resolution::kNone: return "none";
    case Resolution::kSinkConstant: return "sink_constant";
    case Resolution::kSinkGlobal: return "sink_global";
    case Resolution::kSinkReturnValue: return "sink_return_value";
    case Resolution::kSinkStructField: return "sink_struct_field";
    case Resolution::kSinkStackVariable: return "sink_stack_variable";
    case Resolution::kHopToCaller: return "hop_to_caller";
    case Resolution::kHopAssignment: return "hop_assignment";
  }
  return "none";
}

std::optional<Resolution> ResolutionForCategory(std::string_view category) {
  static const std::map<std::string, Resolution, std::less<>> kMap = {
      {"parameter of function", Resolution::kHopToCaller},
      {"assignment from variable", Resolution::kHopAssignment},
      {"constant value", Resolution::kSinkConstant},
      {"global variable", Resolution::kSinkGlobal},
      {"return value of function call", Resolution::kSinkReturnValue},
      {"field of structure", Resolution::kSinkStructField},
      {"stack variable", Resolution::kSinkStackVariable},
  };
  auto it = kMap.find(category);
  if (it == kMap.end()) return std::nullopt;
  return it->second;
}

bool IsSink(Resolution r) {
  return r != Resolution::kNone && r != Resolution::kHopToCaller &&
         r != Resolution::kHopAssignment;
}

nlohmann::json TaintStep::ToJson() const {
  auto vs = ViolationsJson(violations_seen);
  return {{"task", task.ToJson()},
          {"verified", verified},
          {"resolution", resolution == Resolution::kNone
                             ? nlohmann::json()
                             : nlohmann::json(ResolutionName(resolution))},
          {"next", next ? next->ToJson() : nlohmann::json()},
          {"attempts_used", attempts_used},
          {"temperatures", temperatures},
          {"violations_seen", std::move(vs)},
          {"outcome", outcome.Normalized()}};
}

std::string_view TriageStatusName(TriageStatus s) {
  switch (s) {
    case TriageStatus::kVerified: return "verified";
    case TriageStatus::kExhaustedRetries: return "exhausted_retries";
    case TriageStatus::kDepthLimited: return "depth_limited";
    case TriageStatus::kRetrievalFailed: return "retrieval_failed";
  }
  return "verified";
}

std::optional<TriageStatus> TriageStatusFromName(std::string_view name) {
  for (auto s : {TriageStatus::kVerified, TriageStatus::kExhaustedRetries,
                 TriageStatus::kDepthLimited, TriageStatus::kRetrievalFailed}) {
    if (TriageStatusName(s) == name) return s;
  }
  return std::nullopt;
}

nlohmann::json TriageResult::ToJson() const {
  auto chain_json = nlohmann::json::array();
  for (const auto& s : chain) chain_json.push_back(s.ToJson());
  nlohmann::json by_class = nlohmann::json::object();
  for (auto c : {ViolationClass::kUnrecognized, ViolationClass::kIncomplete,
                 ViolationClass::kInconsistent}) {
    auto it = violations_by_class.find(c);
    by_class[std::string(ViolationClassName(c))] =
        it == violations_by_class.end() ? 0 : it->second;
  }
  return {{"schema", "triage.v1"},
          {"blamed_function", blamed_function},
          {"blamed_file", OptionalJson(blamed_file)},
          {"blame_flagged", blame_flagged},
          {"note", note},
          {"bug_category", bug_category},
          {"program", program_id},
          {"crash_task", crash_task ? crash_task->ToJson() : nlohmann::json()},
          {"identify_attempts", identify_attempts},
          {"chain", std::move(chain_json)},
          {"total_executions", total_executions},
          {"total_violations", total_violations},
          {"violations_by_class", std::move(by_class)},
          {"tokens", tokens.ToJson()},
          {"status", TriageStatusName(status)}};
}

Triager::Triager(const SourceIndex& index, Backend& backend,
                 std::map<std::string, PseudoProgram> programs,
                 std::map<std::string, ExecutionSpec> specs, AgentConfig config)
    : index_(index),
      backend_(backend),
      programs_(std::move(programs)),
      specs_(std::move(specs)),
      config_(std::move(config)) {
  for (const auto& id : {config_.taint_program, config_.identify_program}) {
    if (!programs_.contains(id)) {
      throw Error(ErrorCode::kProgramInvalid, "program not loaded: " + id);
    }
  }
  if (programs_.at(config_.identify_program).kind != ProgramKind::kNatural) {
    throw Error(ErrorCode::kProgramInvalid,
                config_.identify_program + " must be a natural-language program");
  }
  for (const auto& [id, p] : programs_) {
    if (p.kind != ProgramKind::kPseudoExec) continue;
    auto it = specs_.find(p.spec_ref);
    if (it == specs_.end()) {
      throw Error(ErrorCode::kSpecInvalid,
                  id + " refers to missing spec " + p.spec_ref);
    }
    std::set<std::string> a(p.accepted_categories.begin(), p.accepted_categories.end());
    std::set<std::string> b(it->second.accepted_categories.begin(),
                            it->second.accepted_categories.end());
    if (a != b) {
      throw Error(ErrorCode::kSpecInvalid,
                  id + " and " + p.spec_ref + " accept different categories");
    }
  }
}

const PseudoProgram& Triager::ProgramFor(const CrashReport& report) const {
  if (report.bug_category == BugCategory::kStackOutOfBounds) {
    auto it = programs_.find(config_.stack_program);
    if (it != programs_.end()) return it->second;
  }
  return programs_.at(config_.taint_program);
}

const ExecutionSpec& Triager::SpecFor(const PseudoProgram& program) const {
  return specs_.at(program.spec_ref);
}

SourceMap Triager::PromptSources(const TaintTask& task,
                                 const CrashReport& report) const {
  SourceMap out;
  auto self = index_.Retrieve(task.function);
  if (!self.found) {
    throw Error(ErrorCode::kRetrievalFailed,
                "no definition of " + task.function + " in the source snapshot");
  }
  out.emplace(task.function, std::move(self));
  // The next outer frame holds the call site a parameter hop has to name.
  if (auto cur = FrameOf(report, task.function);
      cur && *cur + 1 < report.call_trace.size()) {
    const auto& caller = report.call_trace[*cur + 1].function;
    if (!out.contains(caller)) {
      auto src = index_.Retrieve(caller);
      if (src.found) out.emplace(caller, std::move(src));
    }
  }
  return out;
}

VerificationContext Triager::ContextFor(const TaintTask& task,
                                        const ExecutionOutcome& outcome,
                                        const SourceMap& prompt_sources,
                                        const CrashReport& report) const {
  VerificationContext ctx;
  ctx.sources = prompt_sources;
  ctx.call_trace = report.call_trace;
  ctx.crash_frame_index = report.crash_frame_index;
  ctx.current_function = task.function;
  auto add = [&](const std::string& name) {
    if (name.empty() || ctx.sources.contains(name)) return;
    auto src = index_.Retrieve(name);
    if (src.found) ctx.sources.emplace(name, std::move(src));
  };
  for (const auto& r : outcome.records) {
    if (auto c = r.Get("Caller")) add(std::string(text::Trim(*c)));
    if (auto f = r.Get("Function")) add(std::string(text::Trim(*f)));
    if (auto s = r.Get("Structure")) add(AggregateName(*s));
  }
  return ctx;
}

TaintTask Triager::IdentifyCrashVariable(Session& s) const {
  const auto& report = *s.report;
  const auto& frame = CrashFrame(report);
  TaintTask task;
  task.function = frame.function;
  task.hint_line = frame.line;
  task.origin = TaskOrigin::kCrashSite;

  auto src = index_.Retrieve(frame.function);
  if (!src.found) {
    throw Error(ErrorCode::kRetrievalFailed,
                "crash function " + frame.function + " is not in the source snapshot");
  }
  SourceMap sources;
  sources.emplace(frame.function, src);
  const auto& program = programs_.at(config_.identify_program);
  auto req = BuildPrompt(program, task, sources, report);
  req.max_output_tokens = config_.max_output_tokens;

  for (int i = 0; i < config_.identify_attempts; ++i) {
    req.temperature = config_.schedule.TemperatureFor(i);
    auto before = s.ledger.Report().total;
    std::string reply;
    std::optional<std::string> variable;
    std::string problem;
    try {
      reply = Complete(backend_, req, s.ledger).text;
      std::optional<nlohmann::json> j;
      if (!text::Trim(reply).empty()) {
        j = ExtractJsonObject(reply);
        if (!j) j = FormatFallback(reply, kIdentifySchema, backend_, s.ledger, 0);
      }
      if (j && j->contains("variable") && (*j)["variable"].is_string()) {
        std::string v = std::string(text::Trim((*j)["variable"].get<std::string>()));
        while (!v.empty() && (v.front() == '&' || v.front() == '*')) v.erase(0, 1);
        bool in_body = false;
        for (const auto& def : src.definitions) {
          for (const auto& line : def.lines) {
            if (!v.empty() && text::ContainsToken(line, v)) in_body = true;
          }
        }
        if (in_body) {
          variable = v;
        } else {
          problem = "variable '" + v + "' does not occur in " + frame.function;
        }
        if (!task.hint_line && (*j).contains("line") && (*j)["line"].is_number_integer()) {
          task.hint_line = (*j)["line"].get<int>();
        }
      } else {
        problem = "reply names no variable";
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kResponseTruncated &&
          e.code() != ErrorCode::kFormatFailed) {
        throw;
      }
      problem = e.what();
    }
    auto after = s.ledger.Report().total;
    s.audit.push_back(
        {{"event", "identify"},
         {"attempt", i},
         {"temperature", req.temperature},
         {"prompt_sha256", req.PromptSha256()},
         {"tokens",
          {{"prompt_tokens", after.prompt_tokens - before.prompt_tokens},
           {"completion_tokens", after.completion_tokens - before.completion_tokens}}},
         {"reply", reply},
         {"variable", OptionalJson(variable)},
         {"problem", problem}});
    ++s.identify_attempts;
    if (variable) {
      task.variable = *variable;
      return task;
    }
  }
  throw Error(ErrorCode::kVariableUnidentified,
              "no usable crash variable after " +
                  std::to_string(config_.identify_attempts) + " attempts");
}

TaintStep Triager::RunTaintStep(const TaintTask& task, Session& s) const {
  const auto& report = *s.report;
  const auto& program = *s.program;
  auto sources = PromptSources(task, report);
  auto req = BuildPrompt(program, task, sources, report);
  req.max_output_tokens = config_.max_output_tokens;

  TaintStep step;
  step.task = task;
  for (int attempt = 0; attempt <= config_.retry_cap; ++attempt) {
    req.temperature = config_.schedule.TemperatureFor(attempt);
    req.attempt = attempt;
    ++step.attempts_used;
    step.temperatures.push_back(req.temperature);
    auto before = s.ledger.Report().total;

    ExecutionOutcome out;
    out.program_id = program.id;
    out.spec_ref = program.spec_ref;
    std::vector<Violation> violations;
    bool synthetic = false;
    try {
      auto resp = Complete(backend_, req, s.ledger);
      out = ParseOutcome(resp.text, program);
      if (out.needs_format_fallback) {
        ApplyJson(out, FormatFallback(resp.text, OutcomeSchemaExample(), backend_,
                                      s.ledger, attempt));
        out.formatted = true;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kResponseTruncated) {
        violations.push_back(
            Synthetic(ViolationClass::kIncomplete, "truncated", e.what()));
      } else if (e.code() == ErrorCode::kFormatFailed) {
        violations.push_back(
            Synthetic(ViolationClass::kUnrecognized, "format", e.what()));
      } else {
        throw;
      }
      synthetic = true;
    }
    out.attempt = attempt;
    out.temperature = req.temperature;

    VerificationContext ctx;
    if (!synthetic) {
      ctx = ContextFor(task, out, sources, report);
      if (config_.verification) violations = Verify(out, *s.spec, ctx);
    }
    const auto verifier_violations = ViolationsJson(violations);

    // Turn a clean outcome into a resolution; an outcome the state machine
    // cannot act on is rejected like any other violation.
    std::optional<TaintTask> next;
    Resolution resolution = Resolution::kNone;
    if (!synthetic && violations.empty()) {
      const auto* primary = out.Primary();
      auto r = primary ? ResolutionForCategory(primary->category) : std::nullopt;
      if (!r) {
        violations.push_back(Synthetic(
            ViolationClass::kUnrecognized, "category",
            primary ? "no handler for category '" + primary->category + "'"
                    : "no output produced"));
      } else if (*r == Resolution::kHopToCaller || *r == Resolution::kHopAssignment) {
        bool to_caller = *r == Resolution::kHopToCaller;
        auto variable = primary->Get("Variable");
        auto caller = primary->Get("Caller");
        if (!variable || (to_caller && !caller)) {
          violations.push_back(Synthetic(ViolationClass::kIncomplete, "fields",
                                         "hop lacks Variable or Caller"));
        } else {
          TaintTask n;
          n.variable = std::string(text::Trim(*variable));
          n.function = to_caller ? std::string(text::Trim(*caller)) : task.function;
          if (auto line = primary->Get("Line")) n.hint_line = ParseLineRef(*line).number;
          n.origin = to_caller ? TaskOrigin::kParameterHop : TaskOrigin::kAssignmentHop;
          n.depth = task.depth + 1;
          next = n;
          resolution = *r;
        }
      } else {
        resolution = *r;
      }
    }

    auto after = s.ledger.Report().total;
    auto source_names = nlohmann::json::array();
    for (const auto& [name, unused] : ctx.sources) source_names.push_back(name);
    s.audit.push_back(
        {{"event", "execution"},
         {"step", task.depth},
         {"task", task.ToJson()},
         {"program", program.id},
         {"spec", program.spec_ref},
         {"attempt", attempt},
         {"temperature", req.temperature},
         {"prompt_sha256", req.PromptSha256()},
         {"tokens",
          {{"prompt_tokens", after.prompt_tokens - before.prompt_tokens},
           {"completion_tokens", after.completion_tokens - before.completion_tokens}}},
         {"reply", out.raw},
         {"formatted", out.formatted},
         {"synthetic", synthetic},
         {"verifier", config_.verification ? "esv" : "none"},
         {"records", RecordsJson(out.records)},
         {"context_sources", std::move(source_names)},
         {"verifier_violations", verifier_violations},
         {"violations", ViolationsJson(violations)}});

    step.outcome = out;
    if (violations.empty()) {
      step.verified = true;
      step.resolution = resolution;
      step.next = next;
      return step;
    }
    step.violations_seen.insert(step.violations_seen.end(), violations.begin(),
                                violations.end());

    // A caller that is in the trace but has no retrievable definition cannot
    // be verified by any amount of re-analysis; hand it to the next step,
    // which ends the run as retrieval_failed.
    const auto* primary = out.Primary();
    if (!synthetic && primary &&
        ResolutionForCategory(primary->category) == Resolution::kHopToCaller) {
      auto caller = primary->Get("Caller");
      auto variable = primary->Get("Variable");
      bool only_missing_caller =
          caller && variable &&
          std::all_of(violations.begin(), violations.end(), [&](const Violation& v) {
            return v.unverifiable && v.missing_source == text::Trim(*caller);
          });
      auto cur = FrameOf(report, task.function);
      if (only_missing_caller && cur &&
          FindFrame(report, text::Trim(*caller), *cur + 1) &&
          !index_.Retrieve(text::Trim(*caller)).found) {
        TaintTask n;
        n.variable = std::string(text::Trim(*variable));
        n.function = std::string(text::Trim(*caller));
        if (auto line = primary->Get("Line")) n.hint_line = ParseLineRef(*line).number;
        n.origin = TaskOrigin::kParameterHop;
        n.depth = task.depth + 1;
        step.resolution = Resolution::kHopToCaller;
        step.next = n;
        return step;
      }
    }
  }
  return step;
}

TriageResult Triager::Triage(const CrashReport& report,
                             std::vector<nlohmann::json>* audit) const {
  Session s;
  s.report = &report;
  s.program = &ProgramFor(report);
  s.spec = &SpecFor(*s.program);
  s.audit.push_back({{"event", "session"},
                     {"schema", "audit.v1"},
                     {"report", ToJson(report)},
                     {"program", s.program->id},
                     {"spec", s.spec->id},
                     {"backend", backend_.Id()},
                     {"config", config_.ToJson()}});

  TriageResult r;
  r.bug_category = report.CategoryString();
  r.program_id = s.program->id;
  const auto& crash_fn = CrashFrame(report).function;
  r.blamed_function = crash_fn;
  auto last_function = [&]() {
    return r.chain.empty() ? crash_fn : r.chain.back().task.function;
  };
  auto degrade = [&](TriageStatus status, std::string note) {
    r.status = status;
    r.blamed_function = last_function();
    r.blame_flagged = true;
    r.note = std::move(note);
  };

  std::optional<TaintTask> task;
  try {
    task = IdentifyCrashVariable(s);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kRetrievalFailed) {
      degrade(TriageStatus::kRetrievalFailed, e.what());
    } else if (e.code() == ErrorCode::kVariableUnidentified) {
      degrade(TriageStatus::kExhaustedRetries, e.what());
    } else {
      throw;
    }
  }
  r.identify_attempts = s.identify_attempts;

  if (task) {
    r.crash_task = task;
    for (;;) {
      if (task->depth >= config_.max_depth) {
        degrade(TriageStatus::kDepthLimited,
                "reached max_depth " + std::to_string(config_.max_depth));
        break;
      }
      try {
        r.chain.push_back(RunTaintStep(*task, s));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kRetrievalFailed) throw;
        degrade(TriageStatus::kRetrievalFailed, e.what());
        break;
      }
      const auto& last = r.chain.back();
      if (last.resolution == Resolution::kNone) {
        degrade(TriageStatus::kExhaustedRetries,
                "no verified execution after " + std::to_string(last.attempts_used) +
                    " attempts");
        break;
      }
      if (IsSink(last.resolution)) {
        r.status = TriageStatus::kVerified;
        r.blamed_function = last.task.function;
        break;
      }
      task = *last.next;
    }
  }

  for (const auto& step : r.chain) {
    r.total_executions += step.attempts_used;
    r.total_violations += static_cast<int>(step.violations_seen.size());
    for (const auto& v : step.violations_seen) ++r.violations_by_class[v.cls];
  }
  r.tokens = s.ledger.Report();
  if (auto defs = index_.Lookup(r.blamed_function); !defs.empty()) {
    r.blamed_file = defs.front().file;
  } else if (auto i = FrameOf(report, r.blamed_function);
             i && report.call_trace[*i].file) {
    r.blamed_file = report.call_trace[*i].file;
  }

  s.audit.push_back({{"event", "result"}, {"result", r.ToJson()}});
  if (audit) *audit = std::move(s.audit);
  return r;
}

nlohmann::json Triager::ReplayVerify(const std::vector<nlohmann::json>& audit) const {
  std::optional<CrashReport> report;
  int executions = 0;
  int skipped = 0;
  int matched = 0;
  auto mismatches = nlohmann::json::array();
  auto key = [](const nlohmann::json& vs) {
    std::vector<std::string> out;
    for (const auto& v : vs) {
      out.push_back(v.at("class").get<std::string>() + "/" +
                    v.at("rule_id").get<std::string>() + "/" +
                    v.value("record_index", nlohmann::json()).dump());
    }
    return out;
  };
  for (const auto& ev : audit) {
    auto kind = ev.value("event", "");
    if (kind == "session") {
      report = ReportFromJson(ev.at("report"));
      continue;
    }
    if (kind != "execution") continue;
    ++executions;
    if (!report) {
      throw Error(ErrorCode::kInvalidArgument, "audit log lacks a session event");
    }
    if (ev.value("synthetic", false) || ev.value("verifier", "esv") != "esv") {
      ++skipped;
      continue;
    }
    auto pit = programs_.find(ev.at("program").get<std::string>());
    if (pit == programs_.end()) {
      throw Error(ErrorCode::kProgramInvalid,
                  "audit refers to unknown program " + ev["program"].dump());
    }
    const auto& program = pit->second;
    ExecutionOutcome out;
    if (ev.value("formatted", false)) {
      out.program_id = program.id;
      out.spec_ref = program.spec_ref;
      for (const auto& rj : ev.at("records")) out.records.push_back(PrintRecord::FromJson(rj));
    } else {
      out = ParseOutcome(ev.at("reply").get<std::string>(), program);
    }
    auto task = TaintTask::FromJson(ev.at("task"));
    VerificationContext ctx;
    ctx.call_trace = report->call_trace;
    ctx.crash_frame_index = report->crash_frame_index;
    ctx.current_function = task.function;
    for (const auto& name : ev.at("context_sources")) {
      auto src = index_.Retrieve(name.get<std::string>());
      if (src.found) ctx.sources.emplace(src.name, std::move(src));
    }
    auto replayed = ViolationsJson(Verify(out, SpecFor(program), ctx));
    const auto& recorded = ev.at("verifier_violations");
    if (key(recorded) == key(replayed)) {
      ++matched;
    } else {
      mismatches.push_back({{"step", ev.value("step", 0)},
                            {"attempt", ev.value("attempt", 0)},
                            {"recorded", recorded},
                            {"replayed", replayed}});
    }
  }
  return {{"schema", "replay.v1"},
          {"executions", executions},
          {"skipped", skipped},
          {"matched", matched},
          {"mismatched", mismatches.size()},
          {"mismatches", std::move(mismatches)}};
}

std::string_view CorrectnessName(Correctness c) {
  switch (c) {
    case Correctness::kFunction: return "Function";
    case Correctness::kCallee: return "Callee";
    case Correctness::kRelated: return "Related";
    case Correctness::kWrong: return "Wrong";
  }
  return "Wrong";
}

std::optional<Correctness> CorrectnessFromName(std::string_view name) {
  for (auto c : {Correctness::kFunction, Correctness::kCallee,
                 Correctness::kRelated, Correctness::kWrong}) {
    if (CorrectnessName(c) == name) return c;
  }
  return std::nullopt;
}

PatchTruth PatchTruth::FromJson(const nlohmann::json& j) {
  PatchTruth t;
  try {
    t.bug_id = j.value("bug_id", "");
    if (j.contains("patched_functions")) {
      for (const auto& f : j["patched_functions"]) {
        t.patched_functions.push_back(
            {f.at("name").get<std::string>(), f.value("file", "")});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kGroundTruthMissing,
                std::string("malformed patch truth: ") + e.what());
  }
  return t;
}

Correctness ClassifyCorrectness(std::string_view blamed_function,
                                std::optional<std::string> blamed_file,
                                const PatchTruth& truth,
                                const SourceIndex& index) {
  if (truth.patched_functions.empty()) {
    throw Error(ErrorCode::kGroundTruthMissing,
                "no patched functions for " +
                    (truth.bug_id.empty() ? std::string("bug") : truth.bug_id));
  }
  for (const auto& p : truth.patched_functions) {
    if (p.name == blamed_function) return Correctness::kFunction;
  }
  auto body = index.Retrieve(blamed_function);
  for (const auto& p : truth.patched_functions) {
    for (const auto& def : body.definitions) {
      for (const auto& line : def.lines) {
        if (text::ContainsCall(line, p.name)) return Correctness::kCallee;
      }
    }
  }
  if (!blamed_file && body.found) blamed_file = body.definitions.front().location.file;
  if (blamed_file) {
    for (const auto& p : truth.patched_functions) {
      if (p.file.empty()) continue;
      if (p.file == *blamed_file || SharesModule(p.file, *blamed_file)) {
        return Correctness::kRelated;
      }
    }
  }
  return Correctness::kWrong;
}

}  // namespace crashtriage
