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

#include "crashtriage/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "crashtriage/error.hpp"

namespace crashtriage {
namespace {

double Ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string Pct(double r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << r * 100.0 << '%';
  return out.str();
}

std::string Fixed(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

std::string RowCategory(const std::string& label) {
  const auto& known = SummaryCategories();
  return std::find(known.begin(), known.end(), label) != known.end() ? label
                                                                       : "other";
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void Row(std::vector<std::string> r) { rows_.push_back(std::move(r)); }

  std::string Render() const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream out;
    for (std::size_t n = 0; n < rows_.size(); ++n) {
      const auto& r = rows_[n];
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i == 0) {
          out << std::left << std::setw(static_cast<int>(width[i])) << r[i];
        } else {
          out << "  " << std::right << std::setw(static_cast<int>(width[i])) << r[i];
        }
      }
      out << '\n';
      if (n == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w + 2;
        out << std::string(total - 2, '-') << '\n';
      }
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace

const std::vector<std::string>& SummaryCategories() {
  static const std::vector<std::string> kOrder = {
      "stack-out-of-bounds", "slab-out-of-bounds", "global-out-of-bounds",
      "invalid-free",        "double-free",        "use-after-free",
      "null-ptr-def",        "other"};
  return kOrder;
}

nlohmann::json CaseRecord::ToJson() const {
  return {{"bug_id", bug_id},
          {"category", category},
          {"correctness", CorrectnessName(correctness)},
          {"reason", reason},
          {"status", status},
          {"executions", executions},
          {"violations", violations},
          {"unrecognized", unrecognized},
          {"incomplete", incomplete},
          {"inconsistent", inconsistent},
          {"tokens", tokens},
          {"retry_tokens", retry_tokens}};
}

CaseRecord CaseRecord::FromJson(const nlohmann::json& j) {
  CaseRecord c;
  try {
    c.bug_id = j.value("bug_id", "");
    c.category = RowCategory(j.value("category", "other"));
    auto corr = CorrectnessFromName(j.value("correctness", "Wrong"));
    if (!corr) throw Error(ErrorCode::kInvalidArgument, "bad correctness label");
    c.correctness = *corr;
    c.reason = j.value("reason", "");
    c.status = j.value("status", "");
    c.executions = j.value("executions", std::int64_t{0});
    c.violations = j.value("violations", std::int64_t{0});
    c.unrecognized = j.value("unrecognized", std::int64_t{0});
    c.incomplete = j.value("incomplete", std::int64_t{0});
    c.inconsistent = j.value("inconsistent", std::int64_t{0});
    c.tokens = j.value("tokens", std::int64_t{0});
    c.retry_tokens = j.value("retry_tokens", std::int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("case record: ") + e.what());
  }
  return c;
}

CaseRecord CaseRecord::FromTriage(const std::string& bug_id,
                                  const nlohmann::json& triage,
                                  Correctness correctness) {
  CaseRecord c;
  try {
    c.bug_id = bug_id;
    c.category = RowCategory(triage.at("bug_category").get<std::string>());
    c.correctness = correctness;
    c.status = triage.at("status").get<std::string>();
    c.executions = triage.at("total_executions").get<std::int64_t>();
    c.violations = triage.at("total_violations").get<std::int64_t>();
    const auto& by = triage.at("violations_by_class");
    c.unrecognized = by.value("Unrecognized", std::int64_t{0});
    c.incomplete = by.value("Incomplete", std::int64_t{0});
    c.inconsistent = by.value("Inconsistent", std::int64_t{0});
    c.tokens = triage.at("tokens").at("total").at("total").get<std::int64_t>();
    c.retry_tokens = triage.at("tokens").at("retry").at("total").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("triage document: ") + e.what());
  }
  return c;
}

double CategoryRow::Accuracy() const { return Ratio(correct(), total()); }
double CategoryRow::AvgExecutions() const { return Ratio(executions, total()); }
double CategoryRow::AvgViolations() const { return Ratio(violations, total()); }
double CategoryRow::ViolationRate() const { return Ratio(violations, executions); }
double CategoryRow::RetryTokenRatio() const { return Ratio(retry_tokens, tokens); }

double CategoryRow::ClassShare(ViolationClass cls) const {
  std::int64_t n = cls == ViolationClass::kUnrecognized ? unrecognized
                   : cls == ViolationClass::kIncomplete ? incomplete
                                                        : inconsistent;
  return Ratio(n, unrecognized + incomplete + inconsistent);
}

void CategoryRow::Add(const CaseRecord& c) {
  switch (c.correctness) {
    case Correctness::kFunction: ++function; break;
    case Correctness::kCallee: ++callee; break;
    case Correctness::kRelated: ++related; break;
    case Correctness::kWrong: ++wrong; break;
  }
  executions += c.executions;
  max_executions = std::max(max_executions, c.executions);
  violations += c.violations;
  max_violations = std::max(max_violations, c.violations);
  unrecognized += c.unrecognized;
  incomplete += c.incomplete;
  inconsistent += c.inconsistent;
  tokens += c.tokens;
  retry_tokens += c.retry_tokens;
}

nlohmann::json CategoryRow::ToJson() const {
  return {{"category", category},
          {"function", function},
          {"callee", callee},
          {"related", related},
          {"correct", correct()},
          {"wrong", wrong},
          {"total", total()},
          {"accuracy", Accuracy()},
          {"executions", {{"sum", executions}, {"avg", AvgExecutions()}, {"max", max_executions}}},
          {"violations", {{"sum", violations}, {"avg", AvgViolations()}, {"max", max_violations}}},
          {"violation_rate", ViolationRate()},
          {"violation_classes",
           {{"Unrecognized", unrecognized},
            {"Incomplete", incomplete},
            {"Inconsistent", inconsistent},
            {"unrecognized_share", ClassShare(ViolationClass::kUnrecognized)},
            {"incomplete_share", ClassShare(ViolationClass::kIncomplete)},
            {"inconsistent_share", ClassShare(ViolationClass::kInconsistent)}}},
          {"tokens", {{"total", tokens}, {"retry", retry_tokens}, {"retry_ratio", RetryTokenRatio()}}}};
}

BatchSummary Summarize(const std::vector<CaseRecord>& cases) {
  BatchSummary s;
  for (const auto& name : SummaryCategories()) {
    CategoryRow r;
    r.category = name;
    s.rows.push_back(r);
  }
  s.sum.category = "Sum";
  for (const auto& c : cases) {
    auto label = RowCategory(c.category);
    auto it = std::find_if(s.rows.begin(), s.rows.end(),
                           [&](const CategoryRow& r) { return r.category == label; });
    it->Add(c);
    s.sum.Add(c);
  }
  return s;
}

nlohmann::json BatchSummary::ToJson() const {
  auto rows_json = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back(r.ToJson());
  return {{"schema", "summary.v1"}, {"rows", std::move(rows_json)}, {"sum", sum.ToJson()}};
}

std::string BatchSummary::TextTables() const {
  std::vector<const CategoryRow*> all;
  for (const auto& r : rows) all.push_back(&r);
  all.push_back(&sum);

  Table accuracy({"Category", "Function", "Callee", "Related", "Correct", "Wrong",
                  "Total", "Accuracy"});
  Table executions({"Category", "Exec Sum", "Exec Avg", "Exec Max", "Viol Sum",
                    "Viol Avg", "Viol Max", "Viol/Exec"});
  Table classes({"Category", "Unrecognized", "Incomplete", "Inconsistent",
                 "Unrec %", "Incompl %", "Incons %"});
  Table tokens({"Category", "Token", "Retry Token", "Retry/Token"});
  for (const auto* r : all) {
    accuracy.Row({r->category, std::to_string(r->function), std::to_string(r->callee),
                  std::to_string(r->related), std::to_string(r->correct()),
                  std::to_string(r->wrong), std::to_string(r->total()),
                  Pct(r->Accuracy())});
    executions.Row({r->category, std::to_string(r->executions), Fixed(r->AvgExecutions()),
                    std::to_string(r->max_executions), std::to_string(r->violations),
                    Fixed(r->AvgViolations()), std::to_string(r->max_violations),
                    Pct(r->ViolationRate())});
    classes.Row({r->category, std::to_string(r->unrecognized),
                 std::to_string(r->incomplete), std::to_string(r->inconsistent),
                 Pct(r->ClassShare(ViolationClass::kUnrecognized)),
                 Pct(r->ClassShare(ViolationClass::kIncomplete)),
                 Pct(r->ClassShare(ViolationClass::kInconsistent))});
    tokens.Row({r->category, std::to_string(r->tokens), std::to_string(r->retry_tokens),
                Pct(r->RetryTokenRatio())});
  }
  return "Blame accuracy\n" + accuracy.Render() + "\nExecutions\n" +
         executions.Render() + "\nViolation classes\n" + classes.Render() +
         "\nTokens\n" + tokens.Render();
}

}  // namespace crashtriage
