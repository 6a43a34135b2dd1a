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

#include <stdlib.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kCli = CRASHTRIAGE_CLI_PATH;
const std::string kMotivating = std::string(CRASHTRIAGE_FIXTURE_DIR) + "/motivating";

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Spit(const std::string& path, const std::string& data) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream(path, std::ios::binary) << data;
}

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string tmpl = (fs::temp_directory_path() / "crashtriage-cli-XXXXXX").string();
    ASSERT_NE(mkdtemp(tmpl.data()), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override { fs::remove_all(dir_); }

  struct Run {
    int exit_code;
    std::string out;
    std::string err;
  };

  Run Cli(const std::vector<std::string>& args, const std::string& env = "") {
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += Quote(kCli);
    for (const auto& a : args) cmd += " " + Quote(a);
    cmd += " >" + Quote(dir_ + "/stdout") + " 2>" + Quote(dir_ + "/stderr");
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, Slurp(dir_ + "/stdout"), Slurp(dir_ + "/stderr")};
  }

  std::string Path(const std::string& rel) const { return dir_ + "/" + rel; }

  // Cassette that fails step one `bad` times before the clean chain.
  std::string AdversarialCassette(int bad) {
    auto lines = Slurp(kMotivating + "/cassette.jsonl");
    std::istringstream in(lines);
    std::vector<std::string> entries;
    for (std::string l; std::getline(in, l);) {
      if (!l.empty()) entries.push_back(l);
    }
    json incomplete = {{"match", {{"tag", "pseudo_exec"}}},
                       {"reply",
                        "Execution Process:\n1. bh is a parameter.\n\n"
                        "Category: parameter of function\nVariable: bh\n"
                        "Line: 405: if (!trylock_buffer(bh))\n"},
                       {"prompt_tokens", 1000},
                       {"completion_tokens", 50},
                       {"finish_reason", "stop"}};
    std::string out = entries[0] + "\n";
    for (int i = 0; i < bad; ++i) out += incomplete.dump() + "\n";
    for (std::size_t i = 1; i < entries.size(); ++i) out += entries[i] + "\n";
    auto path = Path("adversarial-" + std::to_string(bad) + ".jsonl");
    Spit(path, out);
    return path;
  }

  std::vector<std::string> TriageArgs(const std::string& cassette) {
    return {"triage", kMotivating + "/report.txt", "--source", kMotivating + "/src",
            "--backend", "scripted", "--cassette", cassette};
  }

  std::string dir_;
};

TEST_F(CliTest, MotivatingTriageSucceeds) {
  auto args = TriageArgs(kMotivating + "/cassette.jsonl");
  args.insert(args.end(), {"-o", Path("triage.json"), "--audit", Path("audit.jsonl")});
  auto r = Cli(args);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto result = json::parse(Slurp(Path("triage.json")));
  EXPECT_EQ(result["blamed_function"], "alloc_branch");
  EXPECT_EQ(result["status"], "verified");

  auto replay = Cli({"replay-verify", Path("audit.jsonl"), "--source", kMotivating + "/src"});
  ASSERT_EQ(replay.exit_code, 0) << replay.err;
  EXPECT_EQ(json::parse(replay.out)["matched"], 3);
}

TEST_F(CliTest, ParseAndIndexCommands) {
  auto parsed = Cli({"parse", kMotivating + "/report.txt"});
  ASSERT_EQ(parsed.exit_code, 0) << parsed.err;
  EXPECT_EQ(json::parse(parsed.out)["call_trace"][0]["function"], "trylock_buffer");
  auto indexed = Cli({"index", kMotivating + "/src"});
  ASSERT_EQ(indexed.exit_code, 0) << indexed.err;
  EXPECT_EQ(json::parse(indexed.out)["files_scanned"], 3);
}

TEST_F(CliTest, MissingReportIsAnError) {
  auto args = TriageArgs(kMotivating + "/cassette.jsonl");
  args[1] = Path("no-such-report.txt");
  auto r = Cli(args);
  EXPECT_EQ(r.exit_code, 1);
  auto err = json::parse(r.err);
  EXPECT_EQ(err["error"]["status"], "IoFailure");
}

TEST_F(CliTest, UnusableInputsAreErrors) {
  Spit(Path("garbage.txt"), "nothing to see\n");
  auto args = TriageArgs(kMotivating + "/cassette.jsonl");
  args[1] = Path("garbage.txt");
  auto r = Cli(args);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["status"], "MalformedReport");
  EXPECT_EQ(Cli({"triage"}).exit_code, 1);
  EXPECT_EQ(Cli({"frobnicate"}).exit_code, 1);
}

TEST_F(CliTest, AdversarialCassetteDegrades) {
  auto r = Cli(TriageArgs(AdversarialCassette(12)));
  EXPECT_EQ(r.exit_code, 2) << r.err;
  auto result = json::parse(r.out);
  EXPECT_EQ(result["status"], "exhausted_retries");
  EXPECT_TRUE(result["blame_flagged"]);
  EXPECT_EQ(result["chain"][0]["attempts_used"], 11);
}

TEST_F(CliTest, ConfigPrecedenceIsFlagThenFile) {
  auto cassette = AdversarialCassette(3);
  Spit(Path("ct.conf"), "# retries off\nretry_cap = 0\nsource = " + kMotivating +
                            "/src\nbackend = scripted\ncassette = " + cassette + "\n");
  auto from_file = Cli({"triage", kMotivating + "/report.txt", "--config", Path("ct.conf")});
  EXPECT_EQ(from_file.exit_code, 2) << from_file.err;
  EXPECT_EQ(json::parse(from_file.out)["chain"][0]["attempts_used"], 1);

  auto flag_wins = Cli({"triage", kMotivating + "/report.txt", "--config", Path("ct.conf"),
                        "--retry-cap", "5"});
  EXPECT_EQ(flag_wins.exit_code, 0) << flag_wins.err;
  EXPECT_EQ(json::parse(flag_wins.out)["chain"][0]["attempts_used"], 4);

  Spit(Path("bad.conf"), "retry_cap = lots\n");
  auto bad = Cli({"triage", kMotivating + "/report.txt", "--config", Path("bad.conf"),
                  "--source", kMotivating + "/src", "--backend", "scripted", "--cassette",
                  cassette});
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_EQ(json::parse(bad.err)["error"]["status"], "InvalidArgument");
}

TEST_F(CliTest, EnvironmentOverridesConfigFileEndpoint) {
  // Both endpoints are unreachable; the error names the one in effect.
  Spit(Path("http.conf"), "endpoint = http://127.0.0.1:9/file\nsource = " + kMotivating +
                              "/src\ntimeout_seconds = 2\n");
  auto r = Cli({"triage", kMotivating + "/report.txt", "--config", Path("http.conf")},
               "CRASHTRIAGE_ENDPOINT=http://127.0.0.1:1/env");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["status"], "BackendUnavailable");
}

TEST_F(CliTest, EvalSummarizesABatch) {
  const std::string report = Slurp(kMotivating + "/report.txt");
  const std::string cassette = Slurp(kMotivating + "/cassette.jsonl");
  for (int i = 0; i < 10; ++i) {
    std::string id = "bug" + std::to_string(i);
    Spit(Path("reports/" + id + ".txt"), report);
    Spit(Path("cassettes/" + id + ".jsonl"), cassette);
    json truth = {{"bug_id", id},
                  {"patched_functions",
                   {i < 8 ? json{{"name", "alloc_branch"}, {"file", "fs/sysv/itree.c"}}
                          : json{{"name", "shmem_fault"}, {"file", "mm/shmem.c"}}}}};
    Spit(Path("truth/" + id + ".json"), truth.dump());
  }
  auto r = Cli({"eval", "--reports", Path("reports"), "--truth", Path("truth"), "--cassettes",
                Path("cassettes"), "--source", kMotivating + "/src", "--results",
                Path("results"), "-o", Path("summary.json"), "--workers", "4"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto summary = json::parse(Slurp(Path("summary.json")));
  EXPECT_EQ(summary["sum"]["correct"], 8);
  EXPECT_EQ(summary["sum"]["wrong"], 2);
  EXPECT_NE(r.out.find("80.00%"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(Path("results/bug3.triage.json")));
  EXPECT_TRUE(fs::exists(Path("results/bug3.audit.jsonl")));

  fs::remove(Path("truth/bug0.json"));
  auto missing = Cli({"eval", "--reports", Path("reports"), "--truth", Path("truth"),
                      "--cassettes", Path("cassettes"), "--source", kMotivating + "/src",
                      "-o", Path("summary2.json")});
  ASSERT_EQ(missing.exit_code, 0) << missing.err;
  auto s2 = json::parse(Slurp(Path("summary2.json")));
  EXPECT_EQ(s2["sum"]["correct"], 7);
  bool reason_seen = false;
  for (const auto& c : s2["cases"]) {
    if (c["bug_id"] == "bug0") {
      reason_seen = c["reason"].get<std::string>().rfind("GroundTruthMissing", 0) == 0;
    }
  }
  EXPECT_TRUE(reason_seen);
}

TEST_F(CliTest, EvalWithoutReportsFails) {
  fs::create_directories(Path("empty"));
  auto r = Cli({"eval", "--reports", Path("empty"), "--truth", Path("empty"), "--cassettes",
                Path("empty"), "--source", kMotivating + "/src"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err)["error"]["status"], "InvalidArgument");
}

}  // namespace
