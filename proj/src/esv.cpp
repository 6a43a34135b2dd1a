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

#include "crashtriage/esv.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <regex>
#include <set>

#include "crashtriage/error.hpp"
#include "crashtriage/text.hpp"

namespace crashtriage {
namespace {

constexpr Predicate kAllPredicates[] = {
    Predicate::kVariableInLine, Predicate::kLineInSource,
    Predicate::kCallerInTrace,  Predicate::kCallAtCallsite,
    Predicate::kFieldInStructure, Predicate::kValueIsLiteral};

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kSpecInvalid, what);
}

struct LineHit {
  std::string function;
  std::string file;
  std::string text;
};

std::vector<LineHit> ResolveLine(const LineRef& ref,
                                 const VerificationContext& ctx) {
  std::vector<LineHit> hits;
  if (!ref.number) return hits;
  for (const auto& [name, src] : ctx.sources) {
    for (const auto& def : src.definitions) {
      if (ref.file && def.location.file != *ref.file) continue;
      if (auto t = def.LineAt(*ref.number)) {
        hits.push_back({name, def.location.file, std::string(*t)});
      }
    }
  }
  return hits;
}

bool HasSource(const VerificationContext& ctx, const std::string& name) {
  auto it = ctx.sources.find(name);
  return it != ctx.sources.end() && it->second.found;
}

// First definition referenced by the record that the context lacks.
std::optional<std::string> MissingReferenced(const PrintRecord& record,
                                             const VerificationContext& ctx) {
  if (!HasSource(ctx, ctx.current_function)) return ctx.current_function;
  for (const char* field : {"Caller", "Function"}) {
    if (auto name = record.Get(field); name && !HasSource(ctx, *name)) {
      return name;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> FindIn(const std::vector<Frame>& trace,
                                  std::string_view name, std::size_t from) {
  for (std::size_t i = from; i < trace.size(); ++i) {
    if (trace[i].function == name) return i;
  }
  return std::nullopt;
}

std::string StripVariable(std::string_view v) {
  v = text::Trim(v);
  while (!v.empty() && (v.front() == '&' || v.front() == '*')) {
    v = text::Trim(v.substr(1));
  }
  return std::string(v);
}

}  // namespace

std::string AggregateName(std::string_view s) {
  s = text::Trim(s);
  for (std::string_view kw : {"struct ", "union "}) {
    if (text::StartsWith(s, kw)) s = text::Trim(s.substr(kw.size()));
  }
  while (!s.empty() && (s.back() == '*' || s.back() == ' ')) s.remove_suffix(1);
  return std::string(s);
}

namespace {

std::string LastMember(std::string_view s) {
  s = text::Trim(s);
  for (;;) {
    auto arrow = s.rfind("->");
    auto dot = s.rfind('.');
    std::size_t cut = std::string_view::npos;
    std::size_t len = 0;
    if (arrow != std::string_view::npos) {
      cut = arrow;
      len = 2;
    }
    if (dot != std::string_view::npos &&
        (cut == std::string_view::npos || dot > cut)) {
      cut = dot;
      len = 1;
    }
    if (cut == std::string_view::npos) return std::string(s);
    auto tail = text::Trim(s.substr(cut + len));
    if (!tail.empty()) return std::string(tail);
    s = s.substr(0, cut);
  }
}

PredicateResult Pass() { return {true, false, {}, {}}; }

PredicateResult Fail(std::string detail) {
  return {false, false, std::move(detail), {}};
}

PredicateResult Unverifiable(std::string detail, std::optional<std::string> src) {
  return {false, true, "unverifiable: " + detail, std::move(src)};
}

PredicateResult VariableInLine(const ConsistencyRule& rule, const PrintRecord& r,
                               const VerificationContext& ctx) {
  auto var = StripVariable(*r.Get(rule.Field("variable")));
  auto ref = ParseLineRef(*r.Get(rule.Field("line")));
  std::vector<std::string> candidates;
  if (!ref.text.empty()) {
    candidates.push_back(ref.text);
  } else {
    for (auto& hit : ResolveLine(ref, ctx)) candidates.push_back(hit.text);
    if (candidates.empty()) {
      return Unverifiable("text of line " +
                              (ref.number ? std::to_string(*ref.number) : "?") +
                              " is not in the provided source",
                          MissingReferenced(r, ctx));
    }
  }
  for (const auto& c : candidates) {
    if (text::ContainsToken(c, var)) return Pass();
  }
  return Fail("variable '" + var + "' does not occur in line '" +
              candidates.front() + "'");
}

PredicateResult LineInSource(const ConsistencyRule& rule, const PrintRecord& r,
                             const VerificationContext& ctx) {
  auto ref = ParseLineRef(*r.Get(rule.Field("line")));
  if (!ref.number) return Fail("line value carries no line number");
  auto hits = ResolveLine(ref, ctx);
  if (hits.empty()) {
    if (auto missing = MissingReferenced(r, ctx)) {
      return Unverifiable("line " + std::to_string(*ref.number) +
                              " may lie in " + *missing + ", which was not provided",
                          missing);
    }
    return Fail("line " + std::to_string(*ref.number) +
                " is not inside any provided definition");
  }
  if (ref.text.empty()) return Pass();
  auto want = text::NormalizeWhitespace(ref.text);
  for (const auto& hit : hits) {
    if (text::NormalizeWhitespace(hit.text) == want) return Pass();
  }
  return Fail("line " + std::to_string(*ref.number) + " reads '" +
              std::string(text::Trim(hits.front().text)) + "', not '" + want + "'");
}

PredicateResult CallerInTrace(const ConsistencyRule& rule, const PrintRecord& r,
                              const VerificationContext& ctx) {
  auto caller = std::string(text::Trim(*r.Get(rule.Field("caller"))));
  auto anywhere = FindIn(ctx.call_trace, caller, 0);
  if (!anywhere) return Fail("'" + caller + "' is not in the call trace");
  auto cur = FindIn(ctx.call_trace, ctx.current_function, ctx.crash_frame_index);
  if (!cur) cur = FindIn(ctx.call_trace, ctx.current_function, 0);
  if (!cur) return Pass();
  if (FindIn(ctx.call_trace, caller, *cur + 1)) return Pass();
  return Fail("'" + caller + "' does not call '" + ctx.current_function +
              "' in the call trace");
}

PredicateResult CallAtCallsite(const ConsistencyRule& rule, const PrintRecord& r,
                               const VerificationContext& ctx) {
  auto ref = ParseLineRef(*r.Get(rule.Field("line")));
  auto caller = std::string(text::Trim(*r.Get(rule.Field("caller"))));
  const auto& callee = ctx.current_function;
  if (!ref.text.empty() && text::ContainsCall(ref.text, callee)) return Pass();
  if (!HasSource(ctx, caller)) {
    return Unverifiable("source of '" + caller + "' was not provided", caller);
  }
  if (ref.number) {
    for (const auto& def : ctx.sources.at(caller).definitions) {
      auto t = def.LineAt(*ref.number);
      if (t && text::ContainsCall(*t, callee)) return Pass();
    }
  }
  return Fail("line " + (ref.number ? std::to_string(*ref.number) : "?") +
              " of '" + caller + "' does not call '" + callee + "'");
}

PredicateResult FieldInStructure(const ConsistencyRule& rule,
                                 const PrintRecord& r,
                                 const VerificationContext& ctx) {
  auto structure = AggregateName(*r.Get(rule.Field("structure")));
  auto field = LastMember(*r.Get(rule.Field("field")));
  if (!HasSource(ctx, structure)) {
    return Unverifiable("definition of '" + structure + "' was not provided",
                        structure);
  }
  for (const auto& def : ctx.sources.at(structure).definitions) {
    for (const auto& line : def.lines) {
      if (text::ContainsToken(line, field)) return Pass();
    }
  }
  return Fail("'" + structure + "' has no field '" + field + "'");
}

PredicateResult ValueIsLiteral(const ConsistencyRule& rule, const PrintRecord& r,
                               const VerificationContext&) {
  auto value = *r.Get(rule.Field("value"));
  if (IsLiteral(value)) return Pass();
  return Fail("'" + value + "' is not a literal");
}

}  // namespace

std::string_view ViolationClassName(ViolationClass cls) {
  switch (cls) {
    case ViolationClass::kUnrecognized: return "Unrecognized";
    case ViolationClass::kIncomplete: return "Incomplete";
    case ViolationClass::kInconsistent: return "Inconsistent";
  }
  return "Inconsistent";
}

std::optional<ViolationClass> ViolationClassFromName(std::string_view name) {
  for (auto c : {ViolationClass::kUnrecognized, ViolationClass::kIncomplete,
                 ViolationClass::kInconsistent}) {
    if (ViolationClassName(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view PredicateName(Predicate predicate) {
  switch (predicate) {
    case Predicate::kVariableInLine: return "variable_in_line";
    case Predicate::kLineInSource: return "line_in_source";
    case Predicate::kCallerInTrace: return "caller_in_trace";
    case Predicate::kCallAtCallsite: return "call_at_callsite";
    case Predicate::kFieldInStructure: return "field_in_structure";
    case Predicate::kValueIsLiteral: return "value_is_literal";
  }
  return "variable_in_line";
}

std::optional<Predicate> PredicateFromName(std::string_view name) {
  for (auto p : kAllPredicates) {
    if (PredicateName(p) == name) return p;
  }
  return std::nullopt;
}

const std::map<std::string, std::string>& PredicateDefaultParams(Predicate p) {
  static const std::map<Predicate, std::map<std::string, std::string>> kParams = {
      {Predicate::kVariableInLine, {{"variable", "Variable"}, {"line", "Line"}}},
      {Predicate::kLineInSource, {{"line", "Line"}}},
      {Predicate::kCallerInTrace, {{"caller", "Caller"}}},
      {Predicate::kCallAtCallsite, {{"line", "Line"}, {"caller", "Caller"}}},
      {Predicate::kFieldInStructure, {{"structure", "Structure"}, {"field", "Field"}}},
      {Predicate::kValueIsLiteral, {{"value", "Value"}}},
  };
  return kParams.at(p);
}

std::string ConsistencyRule::Field(const std::string& param) const {
  auto it = params.find(param);
  if (it != params.end()) return it->second;
  return PredicateDefaultParams(predicate).at(param);
}

bool ExecutionSpec::Accepts(std::string_view category) const {
  return std::find(accepted_categories.begin(), accepted_categories.end(),
                   category) != accepted_categories.end();
}

nlohmann::json ExecutionSpec::ToJson() const {
  auto rules = nlohmann::json::array();
  for (const auto& r : consistency_rules) {
    rules.push_back({{"id", r.id},
                     {"category", r.category},
                     {"predicate", PredicateName(r.predicate)},
                     {"params", r.params}});
  }
  return {{"schema", "spec.v1"},
          {"id", id},
          {"accepted_categories", accepted_categories},
          {"required_fields", required_fields},
          {"consistency_rules", std::move(rules)}};
}

ExecutionSpec ExecutionSpec::FromJson(const nlohmann::json& j) {
  ExecutionSpec s;
  try {
    if (j.value("schema", "") != "spec.v1") Invalid("schema must be spec.v1");
    s.id = j.at("id").get<std::string>();
    s.accepted_categories =
        j.at("accepted_categories").get<std::vector<std::string>>();
    if (j.contains("required_fields")) {
      s.required_fields = j["required_fields"]
                              .get<std::map<std::string, std::vector<std::string>>>();
    }
    if (j.contains("consistency_rules")) {
      for (const auto& rj : j["consistency_rules"]) {
        ConsistencyRule r;
        r.id = rj.at("id").get<std::string>();
        r.category = rj.at("category").get<std::string>();
        auto name = rj.at("predicate").get<std::string>();
        auto p = PredicateFromName(name);
        if (!p) Invalid("rule " + r.id + ": unknown predicate " + name);
        r.predicate = *p;
        r.params = rj.value("params", std::map<std::string, std::string>{});
        s.consistency_rules.push_back(std::move(r));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Invalid(std::string("malformed spec: ") + e.what());
  }

  if (s.id.empty()) Invalid("spec id missing");
  if (s.accepted_categories.empty()) Invalid(s.id + ": no accepted categories");
  std::set<std::string> seen(s.accepted_categories.begin(),
                             s.accepted_categories.end());
  if (seen.size() != s.accepted_categories.size()) {
    Invalid(s.id + ": duplicate accepted category");
  }
  const auto& names = PrintFieldNames();
  for (const auto& [cat, fields] : s.required_fields) {
    if (!s.Accepts(cat)) Invalid(s.id + ": required_fields for unknown category " + cat);
    for (const auto& f : fields) {
      if (f == "Category" || std::find(names.begin(), names.end(), f) == names.end()) {
        Invalid(s.id + ": unknown field " + f);
      }
    }
  }
  std::set<std::pair<std::string, std::string>> rule_ids;
  for (const auto& r : s.consistency_rules) {
    if (r.id.empty()) Invalid(s.id + ": rule without id");
    if (!rule_ids.emplace(r.category, r.id).second) {
      Invalid(s.id + ": duplicate rule " + r.id + " for " + r.category);
    }
    if (!s.Accepts(r.category)) Invalid("rule " + r.id + ": unknown category " + r.category);
    const auto& defaults = PredicateDefaultParams(r.predicate);
    for (const auto& [param, field] : r.params) {
      if (!defaults.contains(param)) Invalid("rule " + r.id + ": unknown param " + param);
    }
    auto req = s.required_fields.find(r.category);
    for (const auto& [param, unused] : defaults) {
      auto field = r.Field(param);
      if (req == s.required_fields.end() ||
          std::find(req->second.begin(), req->second.end(), field) ==
              req->second.end()) {
        Invalid("rule " + r.id + " binds " + field +
                ", which is not required for " + r.category);
      }
    }
  }
  return s;
}

ExecutionSpec LoadSpec(const std::string& path) {
  auto j = nlohmann::json::parse(text::ReadFile(path), nullptr, false);
  if (j.is_discarded()) Invalid(path + ": not JSON");
  return ExecutionSpec::FromJson(j);
}

std::map<std::string, ExecutionSpec> LoadSpecDir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoFailure, "not a directory: " + dir);
  }
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".spec") {
      paths.push_back(e.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::map<std::string, ExecutionSpec> out;
  for (const auto& p : paths) {
    auto s = LoadSpec(p.string());
    auto id = s.id;
    if (!out.emplace(id, std::move(s)).second) Invalid("duplicate spec id " + id);
  }
  return out;
}

nlohmann::json Violation::ToJson() const {
  nlohmann::json j = {{"class", ViolationClassName(cls)},
                      {"rule_id", rule_id},
                      {"detail", detail},
                      {"unverifiable", unverifiable}};
  j["record_index"] = record_index ? nlohmann::json(*record_index) : nlohmann::json();
  j["field"] = field ? nlohmann::json(*field) : nlohmann::json();
  j["missing_source"] =
      missing_source ? nlohmann::json(*missing_source) : nlohmann::json();
  return j;
}

Violation Violation::FromJson(const nlohmann::json& j) {
  Violation v;
  auto cls = ViolationClassFromName(j.at("class").get<std::string>());
  if (!cls) throw Error(ErrorCode::kInvalidArgument, "bad violation class");
  v.cls = *cls;
  v.rule_id = j.at("rule_id").get<std::string>();
  v.detail = j.value("detail", "");
  v.unverifiable = j.value("unverifiable", false);
  if (j.contains("record_index") && !j["record_index"].is_null()) {
    v.record_index = j["record_index"].get<std::size_t>();
  }
  if (j.contains("field") && !j["field"].is_null()) {
    v.field = j["field"].get<std::string>();
  }
  if (j.contains("missing_source") && !j["missing_source"].is_null()) {
    v.missing_source = j["missing_source"].get<std::string>();
  }
  return v;
}

LineRef ParseLineRef(std::string_view value) {
  static const std::regex kRef(
      R"(^\s*(?:[Ll]ine\s+)?(?:([^\s:]+):)?(\d+)(?:\s*:\s*(.*?)|\s+(.*?))?\s*$)");
  LineRef ref;
  std::string v(text::Trim(value));
  std::smatch m;
  if (std::regex_match(v, m, kRef)) {
    if (m[1].matched) ref.file = m[1].str();
    auto n = text::ParseInt(m[2].str());
    if (n && *n > 0) {
      ref.number = static_cast<int>(
          std::min<long long>(*n, std::numeric_limits<int>::max()));
    }
    ref.text = m[3].matched ? m[3].str() : (m[4].matched ? m[4].str() : "");
  } else {
    ref.text = v;
  }
  auto t = text::Trim(ref.text);
  if (t.size() >= 2 && t.front() == '`' && t.back() == '`') {
    t = t.substr(1, t.size() - 2);
  }
  ref.text = std::string(text::Trim(t));
  return ref;
}

bool IsLiteral(std::string_view value) {
  static const std::regex kInt(
      R"(^[-+]?\s*(0[xX][0-9a-fA-F]+|0[0-7]*|[1-9][0-9]*)[uUlL]*$)");
  static const std::regex kFloat(
      R"(^[-+]?\s*(([0-9]+\.[0-9]*|\.[0-9]+)([eE][-+]?[0-9]+)?|[0-9]+[eE][-+]?[0-9]+)[fFlL]?$)");
  static const std::regex kChar(R"(^'(\\.|[^'\\])+'$)");
  static const std::regex kString(R"(^"(\\.|[^"\\])*"$)");
  std::string v(text::Trim(value));
  if (v == "NULL" || v == "nullptr" || v == "true" || v == "false") return true;
  return std::regex_match(v, kInt) || std::regex_match(v, kFloat) ||
         std::regex_match(v, kChar) || std::regex_match(v, kString);
}

PredicateResult EvaluatePredicate(const ConsistencyRule& rule,
                                  const PrintRecord& record,
                                  const VerificationContext& ctx) {
  for (const auto& [param, unused] : PredicateDefaultParams(rule.predicate)) {
    if (!record.Get(rule.Field(param))) {
      return Fail("field " + rule.Field(param) + " is missing");
    }
  }
  switch (rule.predicate) {
    case Predicate::kVariableInLine: return VariableInLine(rule, record, ctx);
    case Predicate::kLineInSource: return LineInSource(rule, record, ctx);
    case Predicate::kCallerInTrace: return CallerInTrace(rule, record, ctx);
    case Predicate::kCallAtCallsite: return CallAtCallsite(rule, record, ctx);
    case Predicate::kFieldInStructure: return FieldInStructure(rule, record, ctx);
    case Predicate::kValueIsLiteral: return ValueIsLiteral(rule, record, ctx);
  }
  return Fail("unknown predicate");
}

std::vector<Violation> Verify(const ExecutionOutcome& outcome,
                              const ExecutionSpec& spec,
                              const VerificationContext& ctx) {
  if (outcome.spec_ref != spec.id) {
    throw Error(ErrorCode::kSpecMismatch, "outcome of program '" +
                                              outcome.program_id + "' refers to spec '" +
                                              outcome.spec_ref + "', not '" + spec.id + "'");
  }
  std::vector<Violation> out;
  if (outcome.records.empty()) {
    out.push_back({ViolationClass::kIncomplete, "output", "no output produced",
                   std::nullopt, std::nullopt, false, std::nullopt});
    return out;
  }
  for (std::size_t i = 0; i < outcome.records.size(); ++i) {
    const auto& rec = outcome.records[i];
    if (!spec.Accepts(rec.category)) {
      out.push_back({ViolationClass::kUnrecognized, "category",
                     "category '" + rec.category + "' is not accepted", i,
                     std::nullopt, false, std::nullopt});
      continue;
    }
    auto req = spec.required_fields.find(rec.category);
    if (req != spec.required_fields.end()) {
      for (const auto& f : req->second) {
        if (!rec.Get(f)) {
          out.push_back({ViolationClass::kIncomplete, "fields",
                         "required field " + f + " is missing", i, f, false,
                         std::nullopt});
        }
      }
    }
    for (const auto& rule : spec.consistency_rules) {
      if (rule.category != rec.category) continue;
      bool bound = true;
      for (const auto& [param, unused] : PredicateDefaultParams(rule.predicate)) {
        if (!rec.Get(rule.Field(param))) bound = false;
      }
      if (!bound) continue;
      auto r = EvaluatePredicate(rule, rec, ctx);
      if (r.passed) continue;
      out.push_back({ViolationClass::kInconsistent, rule.id, r.detail, i,
                     std::nullopt, r.unverifiable, r.missing_source});
    }
  }
  for (std::size_t j = 1; j < outcome.records.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const auto& a = outcome.records[i];
      const auto& b = outcome.records[j];
      if (a.category == b.category && a.fields == b.fields) {
        out.push_back({ViolationClass::kInconsistent, "duplicate_record",
                       "record repeats record " + std::to_string(i), j,
                       std::nullopt, false, std::nullopt});
        break;
      }
    }
  }
  return out;
}

}  // namespace crashtriage
