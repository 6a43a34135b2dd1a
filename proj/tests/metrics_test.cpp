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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "crashtriage/error.hpp"
#include "crashtriage/metrics.hpp"
#include "support.hpp"

namespace crashtriage {
namespace {

using testing::CategoryCounts;
using testing::PublishedCounts;
using testing::Rng;
using testing::SynthesizeRuns;

std::vector<CaseRecord> Records(const std::vector<CategoryCounts>& counts) {
  std::vector<CaseRecord> out;
  for (const auto& c : SynthesizeRuns(counts)) {
    out.push_back(CaseRecord::FromTriage(c.bug_id, c.triage, c.correctness));
  }
  return out;
}

TEST(MetricsTest, RowsMatchRawCountsPerCategory) {
  auto summary = Summarize(Records(PublishedCounts()));
  ASSERT_EQ(summary.rows.size(), 8u);
  for (const auto& c : PublishedCounts()) {
    const CategoryRow* row = nullptr;
    for (const auto& r : summary.rows) {
      if (r.category == c.category) row = &r;
    }
    ASSERT_NE(row, nullptr) << c.category;
    const int n = c.function + c.callee + c.related + c.wrong;
    EXPECT_EQ(row->total(), n);
    EXPECT_EQ(row->function, c.function);
    EXPECT_EQ(row->wrong, c.wrong);
    EXPECT_EQ(row->executions, c.executions);
    EXPECT_EQ(row->violations, c.violations);
    EXPECT_EQ(row->inconsistent, c.inconsistent);
    EXPECT_EQ(row->tokens, c.tokens);
    EXPECT_DOUBLE_EQ(row->Accuracy(),
                     static_cast<double>(c.function + c.callee + c.related) / n);
    EXPECT_DOUBLE_EQ(row->ViolationRate(), static_cast<double>(c.violations) / c.executions);
    EXPECT_DOUBLE_EQ(row->RetryTokenRatio(), static_cast<double>(c.retry_tokens) / c.tokens);
    // Evenly spread sums put the max at the ceiling of the mean.
    EXPECT_EQ(row->max_executions, (c.executions + n - 1) / n);
  }
  EXPECT_EQ(summary.rows.back().category, "other");
  EXPECT_EQ(summary.rows.back().total(), 0);
  EXPECT_EQ(summary.rows.back().Accuracy(), 0.0);
}

TEST(MetricsTest, SumRowAndTables) {
  auto summary = Summarize(Records(PublishedCounts()));
  const auto& s = summary.sum;
  EXPECT_EQ(s.function, 64);
  EXPECT_EQ(s.callee, 29);
  EXPECT_EQ(s.related, 45);
  EXPECT_EQ(s.wrong, 32);
  EXPECT_EQ(s.executions, 546);
  EXPECT_EQ(s.violations, 139);
  EXPECT_EQ(s.unrecognized + s.incomplete + s.inconsistent, s.violations);
  auto tables = summary.TextTables();
  EXPECT_NE(tables.find("81.18%"), std::string::npos);
  EXPECT_NE(tables.find("25.46%"), std::string::npos);
  EXPECT_NE(tables.find("61.15%"), std::string::npos);
  EXPECT_NE(tables.find("46.06%"), std::string::npos);
  auto j = summary.ToJson();
  EXPECT_EQ(j["schema"], "summary.v1");
  EXPECT_EQ(j["sum"]["correct"], 138);
}

// Property: the sum row equals the field-wise sum of the category rows, for
// random case mixes.
TEST(MetricsTest, SumRowIsSumOfRows) {
  Rng rng(23);
  const auto& cats = SummaryCategories();
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<CaseRecord> cases;
    int n = rng.Uniform(0, 40);
    for (int i = 0; i < n; ++i) {
      CaseRecord c;
      c.bug_id = "b" + std::to_string(i);
      c.category = cats[rng.Uniform(0, static_cast<int>(cats.size()) - 1)];
      c.correctness = static_cast<Correctness>(rng.Uniform(0, 3));
      c.unrecognized = rng.Uniform(0, 3);
      c.incomplete = rng.Uniform(0, 3);
      c.inconsistent = rng.Uniform(0, 3);
      c.violations = c.unrecognized + c.incomplete + c.inconsistent;
      c.executions = c.violations + rng.Uniform(1, 5);
      c.tokens = rng.Uniform(1000, 90000);
      c.retry_tokens = rng.Uniform(0, static_cast<int>(c.tokens));
      cases.push_back(c);
    }
    auto s = Summarize(cases);
    CategoryRow manual;
    for (const auto& r : s.rows) {
      manual.function += r.function;
      manual.wrong += r.wrong;
      manual.executions += r.executions;
      manual.violations += r.violations;
      manual.tokens += r.tokens;
      manual.max_executions = std::max(manual.max_executions, r.max_executions);
    }
    EXPECT_EQ(s.sum.total(), n);
    EXPECT_EQ(s.sum.function, manual.function);
    EXPECT_EQ(s.sum.wrong, manual.wrong);
    EXPECT_EQ(s.sum.executions, manual.executions);
    EXPECT_EQ(s.sum.violations, manual.violations);
    EXPECT_EQ(s.sum.tokens, manual.tokens);
    EXPECT_EQ(s.sum.max_executions, manual.max_executions);
    EXPECT_GE(s.sum.Accuracy(), 0.0);
    EXPECT_LE(s.sum.Accuracy(), 1.0);
  }
}

TEST(MetricsTest, CaseRecordJson) {
  CaseRecord c;
  c.bug_id = "x";
  c.category = "use-after-free";
  c.correctness = Correctness::kCallee;
  c.executions = 4;
  c.tokens = 99;
  auto again = CaseRecord::FromJson(c.ToJson());
  EXPECT_EQ(again.ToJson(), c.ToJson());
  EXPECT_EQ(CaseRecord::FromJson({{"category", "KMSAN: uninit-value"}}).category, "other");
  try {
    CaseRecord::FromJson({{"correctness", "Mostly"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  try {
    CaseRecord::FromTriage("x", {{"schema", "triage.v1"}}, Correctness::kWrong);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

}  // namespace
}  // namespace crashtriage
