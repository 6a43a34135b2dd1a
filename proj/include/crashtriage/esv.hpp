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

// Execution specifications and the verifier that checks parsed executions
// against them.
//
// Checks per record, in order:
//   1. category accepted                      else Unrecognized ("category")
//   2. required fields present and non-blank  else Incomplete ("fields")
//   3. consistency rules of the category      else Inconsistent (rule id)
// An Unrecognized record gets no further checks. Rules whose bound fields
// are missing are skipped; the missing field is already reported. A check
// that needs source code the context does not hold fails as "unverifiable".

#ifndef CRASHTRIAGE_ESV_HPP_
#define CRASHTRIAGE_ESV_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashtriage/pcx.hpp"
#include "crashtriage/report.hpp"
#include "crashtriage/retrieval.hpp"

namespace crashtriage {

enum class ViolationClass { kUnrecognized, kIncomplete, kInconsistent };

std::string_view ViolationClassName(ViolationClass cls);
std::optional<ViolationClass> ViolationClassFromName(std::string_view name);

enum class Predicate {
  kVariableInLine,
  kLineInSource,
  kCallerInTrace,
  kCallAtCallsite,
  kFieldInStructure,
  kValueIsLiteral,
};

std::string_view PredicateName(Predicate predicate);
std::optional<Predicate> PredicateFromName(std::string_view name);
// Parameter names a predicate binds to record fields, with default fields.
const std::map<std::string, std::string>& PredicateDefaultParams(Predicate p);

struct ConsistencyRule {
  std::string id;
  std::string category;
  Predicate predicate = Predicate::kVariableInLine;
  std::map<std::string, std::string> params;  // parameter -> field name

  std::string Field(const std::string& param) const;
};

struct ExecutionSpec {
  std::string id;
  std::vector<std::string> accepted_categories;
  std::map<std::string, std::vector<std::string>> required_fields;
  std::vector<ConsistencyRule> consistency_rules;

  bool Accepts(std::string_view category) const;

  // spec.v1. FromJson validates and throws Error{kSpecInvalid}.
  nlohmann::json ToJson() const;
  static ExecutionSpec FromJson(const nlohmann::json& j);
};

ExecutionSpec LoadSpec(const std::string& path);
// Every *.spec file in `dir`, keyed by id.
std::map<std::string, ExecutionSpec> LoadSpecDir(const std::string& dir);

struct Violation {
  ViolationClass cls = ViolationClass::kInconsistent;
  std::string rule_id;
  std::string detail;
  std::optional<std::size_t> record_index;
  std::optional<std::string> field;
  bool unverifiable = false;
  // Definition whose absence made the check unverifiable.
  std::optional<std::string> missing_source;

  bool operator==(const Violation&) const = default;

  nlohmann::json ToJson() const;
  static Violation FromJson(const nlohmann::json& j);
};

struct VerificationContext {
  SourceMap sources;
  std::vector<Frame> call_trace;
  std::size_t crash_frame_index = 0;
  std::string current_function;
};

struct PredicateResult {
  bool passed = false;
  bool unverifiable = false;
  std::string detail;
  std::optional<std::string> missing_source;
};

// A "Line" value: "405: text", "405", "fs/x.c:405: text" or bare text.
struct LineRef {
  std::optional<std::string> file;
  std::optional<int> number;
  std::string text;  // empty when only a number was given
};

LineRef ParseLineRef(std::string_view value);

bool IsLiteral(std::string_view value);

// "struct buffer_head *" -> "buffer_head".
std::string AggregateName(std::string_view value);

PredicateResult EvaluatePredicate(const ConsistencyRule& rule,
                                  const PrintRecord& record,
                                  const VerificationContext& ctx);

// Empty result means verified.
// Throws Error{kSpecMismatch} when outcome.spec_ref differs from spec.id.
std::vector<Violation> Verify(const ExecutionOutcome& outcome,
                              const ExecutionSpec& spec,
                              const VerificationContext& ctx);

}  // namespace crashtriage

#endif  // CRASHTRIAGE_ESV_HPP_
