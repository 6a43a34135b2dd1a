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

// Fixtures, generators and fakes shared by the unit tests and the
// acceptance runner.

#ifndef CRASHTRIAGE_TESTS_SUPPORT_HPP_
#define CRASHTRIAGE_TESTS_SUPPORT_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crashtriage/agent.hpp"
#include "crashtriage/esv.hpp"
#include "crashtriage/llm.hpp"
#include "crashtriage/pcx.hpp"
#include "crashtriage/report.hpp"
#include "crashtriage/retrieval.hpp"

namespace crashtriage::testing {

std::string FixtureDir();
std::string DataDir();
std::string MotivatingDir();

// Deterministic xorshift generator; tests never seed from the clock.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t Next();
  int Uniform(int lo, int hi);  // inclusive
  std::string Identifier(int min_len, int max_len);

 private:
  std::uint64_t state_;
};

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string Write(const std::string& relative, const std::string& contents) const;

 private:
  std::string path_;
};

// The null-pointer dereference in trylock_buffer traced back to alloc_branch.
struct Motivating {
  SourceIndex index;
  CrashReport report;
  std::map<std::string, PseudoProgram> programs;
  std::map<std::string, ExecutionSpec> specs;
  std::vector<CassetteEntry> cassette;  // identify + three clean steps

  static Motivating Load();

  const CassetteEntry& identify() const { return cassette[0]; }
  // Clean reply of taint step `i` (0-based).
  const CassetteEntry& step(int i) const { return cassette[1 + i]; }
};

CassetteEntry Reply(Phase tag, std::string text, std::int64_t prompt_tokens = 100,
                    std::int64_t completion_tokens = 20,
                    std::string finish_reason = "stop");

// Step-one reply that omits the Caller line; fails verification with a
// single Incomplete violation.
std::string IncompleteStepOneReply();

// Forwards to another backend and keeps every request and reply.
class RecordingFake : public Backend {
 public:
  explicit RecordingFake(Backend& inner) : inner_(inner) {}
  LlmResponse Complete(const LlmRequest& request) override;
  std::string Id() const override { return inner_.Id(); }

  struct Exchange {
    LlmRequest request;
    std::string reply;
  };
  std::vector<Exchange> exchanges() const;

 private:
  Backend& inner_;
  mutable std::mutex mu_;
  std::vector<Exchange> exchanges_;
};

// Verification context of the motivating example's step `i` (0-based),
// built from the fixture index the way the agent builds it.
VerificationContext MotivatingContext(const Motivating& m, int step,
                                      const std::vector<std::string>& extra_sources = {});

// Synthetic source corpus with known definitions.
struct GeneratedCorpus {
  struct Definition {
    std::string name;
    std::string file;
    int start_line = 0;
    int end_line = 0;
    std::string body;  // exact bytes, lines joined with '\n', no trailing '\n'
  };
  std::vector<Definition> functions;  // parsable definitions
  std::string duplicate_name;         // defined in two files
  std::string macro_function;         // produced only by macro expansion
};

GeneratedCorpus WriteCorpus(const std::string& root, int function_count,
                            std::uint64_t seed);

// One row of per-category counts used to synthesize runs.
struct CategoryCounts {
  std::string category;
  int function = 0, callee = 0, related = 0, wrong = 0;
  std::int64_t executions = 0, violations = 0;
  std::int64_t unrecognized = 0, incomplete = 0, inconsistent = 0;
  std::int64_t tokens = 0, retry_tokens = 0;
};

const std::vector<CategoryCounts>& PublishedCounts();

// triage.v1 documents (only the fields a summary reads) plus correctness
// labels whose totals per category equal `counts`.
struct SyntheticCase {
  std::string bug_id;
  nlohmann::json triage;
  Correctness correctness;
};
std::vector<SyntheticCase> SynthesizeRuns(const std::vector<CategoryCounts>& counts);

}  // namespace crashtriage::testing

#endif  // CRASHTRIAGE_TESTS_SUPPORT_HPP_
