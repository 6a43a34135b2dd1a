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

#include "support.hpp"

#include <stdlib.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crashtriage/text.hpp"

#ifndef CRASHTRIAGE_FIXTURE_DIR
#error "CRASHTRIAGE_FIXTURE_DIR must be defined"
#endif
#ifndef CRASHTRIAGE_DATA_DIR
#error "CRASHTRIAGE_DATA_DIR must be defined"
#endif

namespace crashtriage::testing {

namespace fs = std::filesystem;

std::string FixtureDir() { return CRASHTRIAGE_FIXTURE_DIR; }
std::string DataDir() { return CRASHTRIAGE_DATA_DIR; }
std::string MotivatingDir() { return FixtureDir() + "/motivating"; }

std::uint64_t Rng::Next() {
  state_ ^= state_ << 13;
  state_ ^= state_ >> 7;
  state_ ^= state_ << 17;
  return state_;
}

int Rng::Uniform(int lo, int hi) {
  return lo + static_cast<int>(Next() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string Rng::Identifier(int min_len, int max_len) {
  static const char kFirst[] = "abcdefghijklmnopqrstuvwxyz_";
  static const char kRest[] = "abcdefghijklmnopqrstuvwxyz_0123456789";
  int len = Uniform(min_len, max_len);
  std::string s(1, kFirst[Next() % (sizeof(kFirst) - 1)]);
  while (static_cast<int>(s.size()) < len) s += kRest[Next() % (sizeof(kRest) - 1)];
  return s;
}

TempDir::TempDir() {
  auto base = fs::temp_directory_path() / "crashtriage-test-XXXXXX";
  std::string tmpl = base.string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::Write(const std::string& relative, const std::string& contents) const {
  auto p = fs::path(path_) / relative;
  fs::create_directories(p.parent_path());
  text::WriteFile(p.string(), contents);
  return p.string();
}

Motivating Motivating::Load() {
  auto dir = MotivatingDir();
  return Motivating{SourceIndex::Build(dir + "/src"),
                    ParseReport(text::ReadFile(dir + "/report.txt")),
                    LoadProgramDir(DataDir() + "/programs"),
                    LoadSpecDir(DataDir() + "/specs"),
                    LoadCassette(dir + "/cassette.jsonl")};
}

CassetteEntry Reply(Phase tag, std::string text, std::int64_t prompt_tokens,
                    std::int64_t completion_tokens, std::string finish_reason) {
  CassetteEntry e;
  e.tag = std::string(PhaseName(tag));
  e.reply = std::move(text);
  e.prompt_tokens = prompt_tokens;
  e.completion_tokens = completion_tokens;
  e.finish_reason = std::move(finish_reason);
  return e;
}

std::string IncompleteStepOneReply() {
  return "Execution Process:\n"
         "1. bh is a parameter of trylock_buffer.\n"
         "\n"
         "Category: parameter of function\n"
         "Variable: bh\n"
         "Line: 405: if (!trylock_buffer(bh))\n";
}

LlmResponse RecordingFake::Complete(const LlmRequest& request) {
  auto resp = inner_.Complete(request);
  std::lock_guard<std::mutex> lock(mu_);
  exchanges_.push_back({request, resp.text});
  return resp;
}

std::vector<RecordingFake::Exchange> RecordingFake::exchanges() const {
  std::lock_guard<std::mutex> lock(mu_);
  return exchanges_;
}

VerificationContext MotivatingContext(const Motivating& m, int step,
                                      const std::vector<std::string>& extra_sources) {
  static const char* kFunctions[] = {"trylock_buffer", "lock_buffer", "alloc_branch"};
  VerificationContext ctx;
  ctx.call_trace = m.report.call_trace;
  ctx.crash_frame_index = m.report.crash_frame_index;
  ctx.current_function = kFunctions[step];
  std::vector<std::string> names = {kFunctions[step],
                                    m.report.call_trace.at(static_cast<std::size_t>(step) + 1)
                                        .function};
  names.insert(names.end(), extra_sources.begin(), extra_sources.end());
  for (const auto& n : names) {
    auto src = m.index.Retrieve(n);
    if (src.found) ctx.sources.emplace(n, std::move(src));
  }
  return ctx;
}

namespace {

// Appends `lines` to `out`, returning the 1-based number of the first one.
int Append(std::vector<std::string>& out, const std::vector<std::string>& lines) {
  int first = static_cast<int>(out.size()) + 1;
  out.insert(out.end(), lines.begin(), lines.end());
  return first;
}

std::vector<std::string> FunctionText(Rng& rng, const std::string& name, int style) {
  std::vector<std::string> f;
  std::string ret = rng.Uniform(0, 1) ? "int" : "struct item *";
  std::string arg = rng.Identifier(2, 8);
  switch (style) {
    case 0:
      f.push_back("static " + ret + (ret.back() == '*' ? "" : " ") + name + "(int " + arg + ")");
      break;
    case 1:
      f.push_back("static inline " + ret);
      f.push_back(name + "(int " + arg + ")");
      break;
    default:
      f.push_back(ret + (ret.back() == '*' ? "" : " ") + name + "(int " + arg + ",");
      f.push_back("\t\tconst char *label)");
      break;
  }
  f.push_back("{");
  int statements = rng.Uniform(1, 6);
  for (int s = 0; s < statements; ++s) {
    switch (rng.Uniform(0, 4)) {
      case 0:
        f.push_back("\t" + arg + " += " + std::to_string(rng.Uniform(1, 99)) + ";");
        break;
      case 1:
        f.push_back("\tif (" + arg + " > " + std::to_string(rng.Uniform(1, 9)) + ") {");
        f.push_back("\t\tpr_info(\"brace } in a string {\\n\");");
        f.push_back("\t}");
        break;
      case 2:
        f.push_back("\t/* a comment with a stray } brace */");
        break;
      case 3:
        f.push_back("#ifdef CONFIG_FIXTURE_" + std::to_string(rng.Uniform(0, 9)));
        f.push_back("\t" + arg + "--;");
        f.push_back("#endif");
        break;
      default:
        f.push_back("\t" + arg + " = helper_" + rng.Identifier(3, 6) + "(" + arg + ", '}');");
        break;
    }
  }
  f.push_back(ret == "int" ? "\treturn " + arg + ";" : "\treturn NULL;");
  f.push_back("}");
  return f;
}

}  // namespace

GeneratedCorpus WriteCorpus(const std::string& root, int function_count,
                            std::uint64_t seed) {
  Rng rng(seed);
  GeneratedCorpus corpus;
  corpus.duplicate_name = "dup_handler";
  corpus.macro_function = "macro_defined_probe";

  const int files = 5;
  std::vector<std::vector<std::string>> contents(files);
  for (int f = 0; f < files; ++f) {
    contents[f] = {"// generated fixture " + std::to_string(f), "#include \"gen.h\"", ""};
  }
  // The macro case goes in the first file: only its expansion defines a body.
  Append(contents[0], {"#define DEFINE_PROBE(n) \\",
                       "\tstatic int n(void) { return 0; }",
                       "DEFINE_PROBE(" + corpus.macro_function + ")", ""});

  std::set<std::string> used = {corpus.macro_function};
  for (int i = 0; i < function_count; ++i) {
    std::string name;
    int file = i % files;
    if (i == 0 || i == 1) {
      name = corpus.duplicate_name;  // files 0 and 1
    } else {
      do {
        name = "fn_" + rng.Identifier(3, 10);
      } while (!used.insert(name).second);
    }
    auto lines = FunctionText(rng, name, rng.Uniform(0, 2));
    int start = Append(contents[file], lines);
    contents[file].push_back("");
    std::string body;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (k) body += '\n';
      body += lines[k];
    }
    corpus.functions.push_back({name, "gen/file" + std::to_string(file) + ".c", start,
                                start + static_cast<int>(lines.size()) - 1, body});
  }
  for (int f = 0; f < files; ++f) {
    std::string text;
    for (const auto& l : contents[f]) text += l + "\n";
    auto p = fs::path(root) / "gen" / ("file" + std::to_string(f) + ".c");
    fs::create_directories(p.parent_path());
    text::WriteFile(p.string(), text);
  }
  return corpus;
}

const std::vector<CategoryCounts>& PublishedCounts() {
  // Per-category raw counts of the published evaluation: correctness split,
  // execution and violation sums, violation classes, token sums.
  static const std::vector<CategoryCounts> kCounts = {
      {"stack-out-of-bounds", 11, 7, 6, 4, 108, 30, 8, 3, 19, 641540, 213927},
      {"slab-out-of-bounds", 10, 9, 8, 7, 169, 38, 4, 10, 24, 1460395, 597269},
      {"global-out-of-bounds", 5, 2, 1, 3, 45, 9, 0, 3, 6, 445852, 217636},
      {"invalid-free", 7, 3, 3, 3, 38, 11, 4, 3, 4, 479002, 246462},
      {"double-free", 1, 0, 1, 2, 8, 3, 0, 0, 3, 129372, 71301},
      {"use-after-free", 7, 4, 13, 9, 72, 24, 4, 11, 9, 765089, 210606},
      {"null-ptr-def", 23, 4, 13, 4, 106, 24, 2, 2, 20, 1440530, 912173},
  };
  return kCounts;
}

std::vector<SyntheticCase> SynthesizeRuns(const std::vector<CategoryCounts>& counts) {
  std::vector<SyntheticCase> out;
  for (const auto& c : counts) {
    const int n = c.function + c.callee + c.related + c.wrong;
    // Spread a sum over n cases; the first `rem` cases take one extra unit.
    auto share = [n](std::int64_t sum, int i) {
      std::int64_t q = sum / n, rem = sum % n;
      return q + (i < rem ? 1 : 0);
    };
    for (int i = 0; i < n; ++i) {
      Correctness corr = i < c.function                          ? Correctness::kFunction
                         : i < c.function + c.callee             ? Correctness::kCallee
                         : i < c.function + c.callee + c.related ? Correctness::kRelated
                                                                 : Correctness::kWrong;
      auto unrec = share(c.unrecognized, i);
      auto incompl = share(c.incomplete, i);
      auto incons = share(c.inconsistent, i);
      auto tokens = share(c.tokens, i);
      auto retry = share(c.retry_tokens, i);
      nlohmann::json triage = {
          {"schema", "triage.v1"},
          {"bug_category", c.category},
          {"status", "verified"},
          {"total_executions", share(c.executions, i)},
          {"total_violations", unrec + incompl + incons},
          {"violations_by_class",
           {{"Unrecognized", unrec}, {"Incomplete", incompl}, {"Inconsistent", incons}}},
          {"tokens",
           {{"total", {{"prompt_tokens", tokens}, {"completion_tokens", 0}, {"total", tokens}}},
            {"retry", {{"prompt_tokens", retry}, {"completion_tokens", 0}, {"total", retry}}}}}};
      out.push_back({c.category + "-" + std::to_string(i), std::move(triage), corr});
    }
  }
  return out;
}

}  // namespace crashtriage::testing
