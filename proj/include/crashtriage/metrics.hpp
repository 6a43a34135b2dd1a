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

// Batch evaluation summaries: blame accuracy, execution and violation
// counts, violation classes and token spend, per bug category plus a Sum
// row.

#ifndef CRASHTRIAGE_METRICS_HPP_
#define CRASHTRIAGE_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashtriage/agent.hpp"

namespace crashtriage {

struct CaseRecord {
  std::string bug_id;
  std::string category;  // a BugCategoryName label
  Correctness correctness = Correctness::kWrong;
  std::string reason;    // why a case failed outright, else empty
  std::string status;    // triage status, empty on failure
  std::int64_t executions = 0;
  std::int64_t violations = 0;
  std::int64_t unrecognized = 0;
  std::int64_t incomplete = 0;
  std::int64_t inconsistent = 0;
  std::int64_t tokens = 0;
  std::int64_t retry_tokens = 0;

  nlohmann::json ToJson() const;
  static CaseRecord FromJson(const nlohmann::json& j);
  // From a triage.v1 document.
  static CaseRecord FromTriage(const std::string& bug_id,
                               const nlohmann::json& triage,
                               Correctness correctness);
};

struct CategoryRow {
  std::string category;
  std::int64_t function = 0;
  std::int64_t callee = 0;
  std::int64_t related = 0;
  std::int64_t wrong = 0;
  std::int64_t executions = 0;
  std::int64_t max_executions = 0;
  std::int64_t violations = 0;
  std::int64_t max_violations = 0;
  std::int64_t unrecognized = 0;
  std::int64_t incomplete = 0;
  std::int64_t inconsistent = 0;
  std::int64_t tokens = 0;
  std::int64_t retry_tokens = 0;

  std::int64_t correct() const { return function + callee + related; }
  std::int64_t total() const { return correct() + wrong; }
  double Accuracy() const;
  double AvgExecutions() const;
  double AvgViolations() const;
  double ViolationRate() const;  // violations / executions
  // Share of one class among all violations.
  double ClassShare(ViolationClass cls) const;
  double RetryTokenRatio() const;

  void Add(const CaseRecord& c);
  nlohmann::json ToJson() const;
};

struct BatchSummary {
  std::vector<CategoryRow> rows;  // fixed category order, empty rows kept
  CategoryRow sum;

  nlohmann::json ToJson() const;
  // Plain-text tables: accuracy, executions, violation classes, tokens.
  std::string TextTables() const;
};

// Row order used by summaries.
const std::vector<std::string>& SummaryCategories();

BatchSummary Summarize(const std::vector<CaseRecord>& cases);

}  // namespace crashtriage

#endif  // CRASHTRIAGE_METRICS_HPP_
