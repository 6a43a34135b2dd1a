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

#include "crashtriage/pcx.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <regex>
#include <set>
#include <sstream>

#include "crashtriage/error.hpp"
#include "crashtriage/text.hpp"

namespace crashtriage {
namespace {

const std::set<std::string, std::less<>>& KnownPlaceholders() {
  static const std::set<std::string, std::less<>> kNames = {
      "variable", "function_name", "bug_category", "call_trace",
      "source_code", "hint_line", "crash_line", "title"};
  return kNames;
}

// Calls `on_text` for literal runs and `on_name` for each {name}.
template <typename OnText, typename OnName>
void ScanTemplate(std::string_view tmpl, OnText on_text, OnName on_name) {
  std::size_t i = 0;
  std::size_t literal = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size()) {
        auto c = static_cast<unsigned char>(tmpl[j]);
        bool ok = std::islower(c) || c == '_' || (j > i + 1 && std::isdigit(c));
        if (!ok) break;
        ++j;
      }
      if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
        on_text(tmpl.substr(literal, i - literal));
        on_name(tmpl.substr(i + 1, j - i - 1));
        i = j + 1;
        literal = i;
        continue;
      }
    }
    ++i;
  }
  on_text(tmpl.substr(literal));
}

std::string TrimBlankLines(const std::vector<std::string>& lines) {
  std::size_t b = 0;
  std::size_t e = lines.size();
  while (b < e && text::Trim(lines[b]).empty()) ++b;
  while (e > b && text::Trim(lines[e - 1]).empty()) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    out += lines[i];
    if (i + 1 < e) out += '\n';
  }
  return out;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string FormatTrace(const CrashReport& report) {
  std::ostringstream out;
  for (std::size_t i = report.crash_frame_index; i < report.call_trace.size();
       ++i) {
    const auto& f = report.call_trace[i];
    out << '#' << (i - report.crash_frame_index) << ' ' << f.function;
    if (f.file) {
      out << ' ' << *f.file;
      if (f.line) out << ':' << *f.line;
    }
    if (i + 1 < report.call_trace.size()) out << '\n';
  }
  return out.str();
}

std::string CrashLine(const CrashReport& report, const RetrievedSource& src) {
  const auto& frame = CrashFrame(report);
  if (!frame.line) return "unknown";
  std::string where = (frame.file ? *frame.file : std::string("?")) + ":" +
                      std::to_string(*frame.line);
  for (const auto& def : src.definitions) {
    if (frame.file && def.location.file != *frame.file) continue;
    if (auto t = def.LineAt(*frame.line)) return where + ": " + std::string(*t);
  }
  return where;
}

std::string ValueString(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::optional<std::string> CanonicalField(std::string_view key) {
  auto lower = Lower(key);
  for (const auto& name : PrintFieldNames()) {
    if (Lower(name) == lower) return name;
  }
  return std::nullopt;
}

std::optional<PrintRecord> RecordFromFlat(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  PrintRecord r;
  auto take = [&r](const nlohmann::json& obj) {
    for (const auto& [key, value] : obj.items()) {
      auto name = CanonicalField(key);
      if (!name) continue;
      if (*name == "Category") {
        if (r.category.empty()) r.category = text::Trim(ValueString(value));
        continue;
      }
      auto v = std::string(text::Trim(ValueString(value)));
      if (!v.empty()) r.fields.emplace(*name, v);
    }
  };
  take(j);
  if (j.contains("fields") && j["fields"].is_object()) take(j["fields"]);
  if (r.category.empty() && r.fields.empty()) return std::nullopt;
  return r;
}

struct Fence {
  bool json_tag = false;
  std::string body;
};

std::vector<Fence> Fences(std::string_view raw) {
  std::vector<Fence> out;
  bool open = false;
  for (const auto& line : text::SplitLines(raw)) {
    auto t = text::Trim(line);
    if (text::StartsWith(t, "```")) {
      if (!open) {
        out.push_back({Lower(text::Trim(t.substr(3))) == "json", {}});
      }
      open = !open;
      continue;
    }
    if (open) {
      out.back().body += line;
      out.back().body += '\n';
    }
  }
  return out;
}

std::optional<nlohmann::json> ParseObject(std::string_view s) {
  auto j = nlohmann::json::parse(s, nullptr, /*allow_exceptions=*/false);
  if (j.is_object()) return j;
  return std::nullopt;
}

}  // namespace

std::vector<std::string> PseudoProgram::Placeholders() const {
  std::vector<std::string> out;
  ScanTemplate(
      template_text, [](std::string_view) {},
      [&out](std::string_view name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) {
          out.emplace_back(name);
        }
      });
  return out;
}

PseudoProgram ParseProgram(std::string_view content) {
  auto lines = text::SplitLines(content);
  std::size_t i = 0;
  while (i < lines.size() && text::Trim(lines[i]).empty()) ++i;
  if (i == lines.size() || text::Trim(lines[i]) != "---") {
    throw Error(ErrorCode::kProgramInvalid, "program lacks a front matter block");
  }
  PseudoProgram p;
  std::string kind = "pseudo_exec";
  bool closed = false;
  for (++i; i < lines.size(); ++i) {
    auto t = text::Trim(lines[i]);
    if (t == "---") {
      closed = true;
      ++i;
      break;
    }
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kProgramInvalid,
                  "bad front matter line: " + std::string(t));
    }
    auto key = text::Trim(t.substr(0, colon));
    auto value = std::string(text::Trim(t.substr(colon + 1)));
    if (key == "id") {
      p.id = value;
    } else if (key == "kind") {
      kind = value;
    } else if (key == "spec_ref") {
      p.spec_ref = value;
    } else if (key == "accepted_categories") {
      for (const auto& c : text::Split(value, ',')) {
        auto name = std::string(text::Trim(c));
        if (!name.empty()) p.accepted_categories.push_back(name);
      }
    } else {
      throw Error(ErrorCode::kProgramInvalid,
                  "unknown front matter key: " + std::string(key));
    }
  }
  if (!closed) throw Error(ErrorCode::kProgramInvalid, "unterminated front matter");

  std::vector<std::vector<std::string>> sections(1);
  for (; i < lines.size(); ++i) {
    if (text::Trim(lines[i]) == "%%") {
      sections.emplace_back();
    } else {
      sections.back().push_back(lines[i]);
    }
  }
  if (sections.size() != 3) {
    throw Error(ErrorCode::kProgramInvalid,
                "expected preamble, template and output sections separated by %%");
  }
  p.preamble = TrimBlankLines(sections[0]);
  p.template_text = TrimBlankLines(sections[1]);
  p.output_instruction = TrimBlankLines(sections[2]);

  if (p.id.empty()) throw Error(ErrorCode::kProgramInvalid, "program id missing");
  if (p.template_text.empty()) {
    throw Error(ErrorCode::kProgramInvalid, p.id + ": empty template");
  }
  if (kind == "pseudo_exec") {
    p.kind = ProgramKind::kPseudoExec;
    auto pre = Lower(p.preamble);
    if (pre.find("strictly simulate the execution of the pseudo code") ==
            std::string::npos ||
        pre.find("step by step") == std::string::npos) {
      throw Error(ErrorCode::kProgramInvalid,
                  p.id + ": preamble must demand a strict step by step simulation");
    }
    if (p.spec_ref.empty() || p.accepted_categories.empty()) {
      throw Error(ErrorCode::kProgramInvalid,
                  p.id + ": pseudo_exec programs need spec_ref and accepted_categories");
    }
  } else if (kind == "natural") {
    p.kind = ProgramKind::kNatural;
  } else {
    throw Error(ErrorCode::kProgramInvalid, p.id + ": unknown kind " + kind);
  }
  for (const auto& name : p.Placeholders()) {
    if (!KnownPlaceholders().contains(name)) {
      throw Error(ErrorCode::kProgramInvalid,
                  p.id + ": unknown placeholder {" + name + "}");
    }
  }
  return p;
}

PseudoProgram LoadProgram(const std::string& path) {
  return ParseProgram(text::ReadFile(path));
}

std::map<std::string, PseudoProgram> LoadProgramDir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoFailure, "not a directory: " + dir);
  }
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".prog") {
      paths.push_back(e.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::map<std::string, PseudoProgram> out;
  for (const auto& path : paths) {
    auto p = LoadProgram(path.string());
    auto id = p.id;
    if (!out.emplace(id, std::move(p)).second) {
      throw Error(ErrorCode::kProgramInvalid, "duplicate program id " + id);
    }
  }
  return out;
}

std::string RenderTemplate(std::string_view tmpl, const Bindings& bindings) {
  std::string out;
  ScanTemplate(
      tmpl, [&out](std::string_view s) { out += s; },
      [&](std::string_view name) {
        auto it = bindings.find(name);
        if (it == bindings.end() || it->second.empty()) {
          throw Error(ErrorCode::kMissingBinding,
                      "no value for placeholder {" + std::string(name) + "}");
        }
        out += it->second;
      });
  return out;
}

std::string_view TaskOriginName(TaskOrigin origin) {
  switch (origin) {
    case TaskOrigin::kCrashSite: return "crash_site";
    case TaskOrigin::kParameterHop: return "parameter_hop";
    case TaskOrigin::kAssignmentHop: return "assignment_hop";
  }
  return "crash_site";
}

std::optional<TaskOrigin> TaskOriginFromName(std::string_view name) {
  for (auto o : {TaskOrigin::kCrashSite, TaskOrigin::kParameterHop,
                 TaskOrigin::kAssignmentHop}) {
    if (TaskOriginName(o) == name) return o;
  }
  return std::nullopt;
}

nlohmann::json TaintTask::ToJson() const {
  return {{"variable", variable},
          {"function", function},
          {"hint_line", hint_line ? nlohmann::json(*hint_line) : nlohmann::json()},
          {"origin", TaskOriginName(origin)},
          {"depth", depth}};
}

TaintTask TaintTask::FromJson(const nlohmann::json& j) {
  TaintTask t;
  t.variable = j.value("variable", "");
  t.function = j.at("function").get<std::string>();
  if (j.contains("hint_line") && j["hint_line"].is_number_integer()) {
    t.hint_line = j["hint_line"].get<int>();
  }
  auto origin = TaskOriginFromName(j.value("origin", "crash_site"));
  if (!origin) throw Error(ErrorCode::kInvalidArgument, "bad task origin");
  t.origin = *origin;
  t.depth = j.value("depth", 0);
  return t;
}

LlmRequest BuildPrompt(const PseudoProgram& program, const TaintTask& task,
                       const SourceMap& sources, const CrashReport& report) {
  if (program.kind == ProgramKind::kPseudoExec && task.variable.empty()) {
    throw Error(ErrorCode::kMissingBinding, "task variable is empty");
  }
  if (task.function.empty()) {
    throw Error(ErrorCode::kMissingBinding, "task function is empty");
  }
  auto self = sources.find(task.function);
  if (self == sources.end() || !self->second.found) {
    throw Error(ErrorCode::kMissingSource,
                "no retrieved definition for " + task.function);
  }

  std::string source_code = self->second.AnnotatedText();
  for (const auto& [name, src] : sources) {
    if (name == task.function || !src.found) continue;
    source_code += "\n";
    source_code += src.AnnotatedText();
  }
  while (!source_code.empty() && source_code.back() == '\n') source_code.pop_back();

  Bindings b;
  b["variable"] = task.variable;
  b["function_name"] = task.function;
  b["bug_category"] = report.CategoryString();
  b["call_trace"] = FormatTrace(report);
  b["source_code"] = source_code;
  b["hint_line"] = task.hint_line ? std::to_string(*task.hint_line) : "unknown";
  b["crash_line"] = CrashLine(report, self->second);
  b["title"] = report.title;
  auto body = RenderTemplate(program.template_text, b);

  auto intermediate = task.ToJson();
  intermediate["bug_category"] = report.CategoryString();

  const bool pseudo = program.kind == ProgramKind::kPseudoExec;
  std::ostringstream user;
  user << "## Task\n"
       << (pseudo ? "Execute the pseudo code below for the task given by this "
                    "intermediate result.\n"
                  : "Answer the question below for the crash given by this "
                    "intermediate result.\n")
       << "```json\n" << intermediate.dump(2) << "\n```\n\n"
       << (pseudo ? "## Pseudo code\n" : "## Question\n")
       << "```\n" << body << "\n```\n\n"
       << "## Source code\n"
       << source_code << "\n\n"
       << "## Output\n"
       << program.output_instruction << "\n";

  LlmRequest req;
  req.system_prompt = program.preamble;
  req.user_prompt = user.str();
  req.tag = pseudo ? Phase::kPseudoExec : Phase::kIdentifyVariable;
  return req;
}

std::optional<std::string> PrintRecord::Get(std::string_view name) const {
  auto it = fields.find(std::string(name));
  if (it == fields.end() || text::Trim(it->second).empty()) return std::nullopt;
  return it->second;
}

nlohmann::json PrintRecord::ToJson() const {
  return {{"category", category}, {"fields", fields}, {"source_span", source_span}};
}

PrintRecord PrintRecord::FromJson(const nlohmann::json& j) {
  PrintRecord r;
  r.category = j.value("category", "");
  if (j.contains("fields")) {
    r.fields = j["fields"].get<std::map<std::string, std::string>>();
  }
  if (j.contains("source_span")) {
    r.source_span = j["source_span"].get<std::vector<std::string>>();
  }
  return r;
}

const PrintRecord* ExecutionOutcome::Primary() const {
  return records.empty() ? nullptr : &records.back();
}

nlohmann::json ExecutionOutcome::Normalized() const {
  auto records_json = nlohmann::json::array();
  for (const auto& r : records) {
    records_json.push_back({{"category", r.category}, {"fields", r.fields}});
  }
  const auto* p = Primary();
  return {{"schema", "outcome.v1"},
          {"program", program_id},
          {"category", p ? nlohmann::json(p->category) : nlohmann::json()},
          {"fields", p ? nlohmann::json(p->fields) : nlohmann::json::object()},
          {"records", std::move(records_json)},
          {"steps", steps},
          {"attempt", attempt},
          {"temperature", temperature}};
}

const std::vector<std::string>& PrintFieldNames() {
  static const std::vector<std::string> kNames = {
      "Category", "Variable", "Line",      "Caller",
      "Function", "Field",    "Structure", "Value"};
  return kNames;
}

ExecutionOutcome ParseOutcome(std::string_view raw,
                              const PseudoProgram& program) {
  static const std::regex kPrint(
      R"(^\s*(?:[-*]\s+)?(Category|Variable|Line|Caller|Function|Field|Structure|Value)\s*:\s*(.*\S)\s*$)");
  ExecutionOutcome out;
  out.program_id = program.id;
  out.spec_ref = program.spec_ref;
  out.raw = std::string(raw);

  PrintRecord* open = nullptr;
  bool in_fence = false;
  for (const auto& line : text::SplitLines(raw)) {
    auto t = text::Trim(line);
    if (text::StartsWith(t, "```")) {
      in_fence = !in_fence;
      open = nullptr;
      continue;
    }
    if (in_fence) continue;
    if (t.empty()) continue;
    std::smatch m;
    if (std::regex_match(line, m, kPrint)) {
      auto key = m[1].str();
      auto value = m[2].str();
      if (key == "Category") {
        out.records.push_back({value, {}, {line}});
        open = &out.records.back();
        continue;
      }
      if (open) {
        open->fields.emplace(key, value);
        open->source_span.push_back(line);
        continue;
      }
    }
    open = nullptr;
    out.steps.emplace_back(t);
  }

  std::optional<nlohmann::json> json;
  for (const auto& f : Fences(raw)) {
    auto body = text::Trim(f.body);
    if (!f.json_tag && (body.empty() || body.front() != '{')) continue;
    if (auto j = ParseObject(body)) json = std::move(j);
  }
  if (!json && out.records.empty()) {
    // A bare JSON reply with no execution text around it.
    json = ParseObject(text::Trim(raw));
  }
  if (json && out.records.empty()) ApplyJson(out, *json);
  out.has_json = json.has_value();
  out.needs_format_fallback = out.records.empty() && !out.has_json;
  return out;
}

void ApplyJson(ExecutionOutcome& outcome, const nlohmann::json& j) {
  std::vector<PrintRecord> records;
  if (j.contains("records") && j["records"].is_array() && !j["records"].empty()) {
    for (const auto& item : j["records"]) {
      if (auto r = RecordFromFlat(item)) records.push_back(std::move(*r));
    }
  } else if (auto r = RecordFromFlat(j)) {
    records.push_back(std::move(*r));
  }
  outcome.records = std::move(records);
  outcome.has_json = true;
  outcome.needs_format_fallback = false;
}

std::optional<nlohmann::json> ExtractJsonObject(std::string_view raw) {
  auto fences = Fences(raw);
  for (auto it = fences.rbegin(); it != fences.rend(); ++it) {
    if (auto j = ParseObject(text::Trim(it->body))) return j;
  }
  auto t = text::Trim(raw);
  if (auto j = ParseObject(t)) return j;
  auto b = t.find('{');
  auto e = t.rfind('}');
  if (b != std::string_view::npos && e != std::string_view::npos && e > b) {
    return ParseObject(t.substr(b, e - b + 1));
  }
  return std::nullopt;
}

std::string OutcomeSchemaExample() {
  return R"({"category": "<category name>", "fields": {"Variable": "<name>", )"
         R"("Line": "<line number>: <source text>", "Caller": "<function>", )"
         R"("Function": "<function>", "Structure": "<struct name>", )"
         R"("Field": "<field>", "Value": "<literal>"}})";
}

nlohmann::json FormatFallback(std::string_view raw,
                              std::string_view schema_example,
                              Backend& backend, TokenLedger& ledger,
                              int attempt) {
  LlmRequest req;
  req.tag = Phase::kFormat;
  req.attempt = attempt;
  req.temperature = 0.0;
  req.system_prompt =
      "You summarize and format the output of a program execution.";
  std::string user = "Summarize the execution output below.\n";
  user += "The output must be the following JSON structure:\n";
  user += schema_example;
  user += "\nOnly include fields that the execution output states. ";
  user += "Reply with the JSON object only.\n\nExecution output:\n```\n";
  user += raw;
  user += "\n```\n";
  req.user_prompt = std::move(user);
  for (int i = 0; i < 2; ++i) {
    auto reply = Complete(backend, req, ledger);
    if (auto j = ExtractJsonObject(reply.text)) return *j;
  }
  throw Error(ErrorCode::kFormatFailed, "formatter reply is not a JSON object");
}

}  // namespace crashtriage
