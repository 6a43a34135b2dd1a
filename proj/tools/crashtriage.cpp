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

// crashtriage-cli: command-line frontend over the C interface.
//
// Exit codes: 0 verified (or success), 2 degraded result, 1 hard error with a
// JSON error object on stderr.
//
// Settings resolve as flag > environment > config file > default. The config
// file holds `key = value` lines; '#' starts a comment.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "crashtriage/crashtriage.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDegraded = 2;

struct CliError : std::runtime_error {
  CliError(std::string status_name, const std::string& message)
      : std::runtime_error(message), status(std::move(status_name)) {}
  std::string status;
};

void Check(ct_status st) {
  if (st != CT_OK) throw CliError(ct_status_name(st), ct_last_error());
}

// Takes ownership of a string returned by the library.
std::string Take(char* s) {
  std::string out = s ? s : "";
  ct_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using IndexHandle = Handle<ct_index, ct_index_free>;
using BackendHandle = Handle<ct_backend, ct_backend_free>;
using EngineHandle = Handle<ct_engine, ct_engine_free>;

std::string ReadInput(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("IoFailure", "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteOutput(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    if (!data.empty() && data.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("IoFailure", "cannot write " + path);
  out << data;
  if (!data.empty() && data.back() != '\n') out << '\n';
  if (!out) throw CliError("IoFailure", "cannot write " + path);
}

std::string TrimCopy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> LoadConfigFile(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(ReadInput(path));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = TrimCopy(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CliError("InvalidArgument", path + ":" + std::to_string(n) + ": expected key = value");
    }
    auto value = TrimCopy(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out[TrimCopy(line.substr(0, eq))] = value;
  }
  return out;
}

// Raw flag values; empty means "not given on the command line".
struct Flags {
  std::string config;
  std::string source;
  std::string backend;
  std::string cassette;
  std::string endpoint;
  std::string api_key;
  std::string model;
  std::string timeout_seconds;
  std::string retry_cap;
  std::string max_depth;
  std::string program_dir;
  std::string spec_dir;
  std::string index_cache;
  std::string workers;
  std::vector<std::string> skip_prefixes;
  bool strict = false;
  bool no_verification = false;
};

class Settings {
 public:
  explicit Settings(const Flags& flags) : flags_(flags) {
    if (!flags.config.empty()) file_ = LoadConfigFile(flags.config);
  }

  std::string Get(const std::string& flag_value, const char* env,
                  const std::string& key, const std::string& fallback = "") const {
    if (!flag_value.empty()) return flag_value;
    if (env) {
      if (const char* v = std::getenv(env); v && *v) return v;
    }
    auto it = file_.find(key);
    return it != file_.end() ? it->second : fallback;
  }

  int GetInt(const std::string& flag_value, const std::string& key, int fallback) const {
    auto s = Get(flag_value, nullptr, key);
    if (s.empty()) return fallback;
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw CliError("InvalidArgument", key + " must be an integer, got '" + s + "'");
    }
  }

  bool GetBool(bool flag_value, const std::string& key) const {
    if (flag_value) return true;
    auto it = file_.find(key);
    return it != file_.end() && (it->second == "true" || it->second == "1");
  }

  std::string source() const { return Get(flags_.source, nullptr, "source"); }

  json BackendConfig(const std::string& kind_override = "") const {
    auto kind = kind_override.empty() ? Get(flags_.backend, nullptr, "backend", "http")
                                      : kind_override;
    json j = {{"kind", kind}};
    auto cassette = Get(flags_.cassette, nullptr, "cassette");
    if (kind == "scripted" || kind == "record") {
      if (cassette.empty()) {
        throw CliError("InvalidArgument", kind + " backend requires --cassette");
      }
      j["cassette"] = cassette;
      j["strict"] = GetBool(flags_.strict, "strict");
    }
    if (kind == "http" || kind == "record") {
      auto endpoint = Get(flags_.endpoint, "CRASHTRIAGE_ENDPOINT", "endpoint");
      auto model = Get(flags_.model, "CRASHTRIAGE_MODEL", "model");
      if (!endpoint.empty()) j["base_url"] = endpoint;
      if (!model.empty()) j["model"] = model;
      j["api_key"] = Get(flags_.api_key, "CRASHTRIAGE_API_KEY", "api_key");
      j["timeout_seconds"] = GetInt(flags_.timeout_seconds, "timeout_seconds", 300);
    }
    return j;
  }

  json EngineConfig() const {
    json j = json::object();
    int retry_cap = GetInt(flags_.retry_cap, "retry_cap", 10);
    if (retry_cap < 0) throw CliError("InvalidArgument", "retry_cap must be >= 0");
    j["retry_cap"] = retry_cap;
    j["max_depth"] = GetInt(flags_.max_depth, "max_depth", 24);
    j["verification"] = !GetBool(flags_.no_verification, "no_verification");
    auto programs = Get(flags_.program_dir, nullptr, "program_dir");
    auto specs = Get(flags_.spec_dir, nullptr, "spec_dir");
    if (!programs.empty()) j["program_dir"] = programs;
    if (!specs.empty()) j["spec_dir"] = specs;
    return j;
  }

  // NULL-able JSON array for ct_parse_report.
  std::optional<std::string> SkipPrefixes() const {
    if (!flags_.skip_prefixes.empty()) return json(flags_.skip_prefixes).dump();
    auto it = file_.find("skip_prefixes");
    if (it == file_.end()) return std::nullopt;
    std::vector<std::string> out;
    std::istringstream in(it->second);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = TrimCopy(item);
      if (!item.empty()) out.push_back(item);
    }
    return json(out).dump();
  }

  json IndexOptions() const {
    json j = json::object();
    auto cache = Get(flags_.index_cache, nullptr, "index_cache");
    if (!cache.empty()) j["cache"] = cache;
    return j;
  }

  int Workers() const {
    int w = GetInt(flags_.workers, "workers",
                   static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    return std::max(1, w);
  }

 private:
  const Flags& flags_;
  std::map<std::string, std::string> file_;
};

std::string ParseReportJson(const std::string& raw, const Settings& settings) {
  char* out = nullptr;
  auto prefixes = settings.SkipPrefixes();
  Check(ct_parse_report(raw.c_str(), prefixes ? prefixes->c_str() : nullptr, &out));
  return Take(out);
}

void BuildIndex(const Settings& settings, IndexHandle& index) {
  auto root = settings.source();
  if (root.empty()) throw CliError("InvalidArgument", "--source is required");
  Check(ct_index_build(root.c_str(), settings.IndexOptions().dump().c_str(), &index.ptr));
}

void NewBackend(const json& config, BackendHandle& backend) {
  Check(ct_backend_new(config.dump().c_str(), &backend.ptr));
}

void NewEngine(const IndexHandle& index, const BackendHandle& backend,
               const Settings& settings, EngineHandle& engine) {
  Check(ct_engine_new(index.ptr, backend.ptr, settings.EngineConfig().dump().c_str(),
                      &engine.ptr));
}

int ExitForResult(const std::string& result_json) {
  auto status = json::parse(result_json).value("status", "");
  return status == "verified" ? kExitOk : kExitDegraded;
}

int CmdParse(const std::string& report_path, const Settings& settings,
             const std::string& output) {
  auto report = ParseReportJson(ReadInput(report_path), settings);
  WriteOutput(output, json::parse(report).dump(2));
  return kExitOk;
}

int CmdIndex(const Settings& settings) {
  IndexHandle index;
  BuildIndex(settings, index);
  char* out = nullptr;
  Check(ct_index_stats(index.ptr, &out));
  std::cout << json::parse(Take(out)).dump(2) << '\n';
  return kExitOk;
}

int CmdTriage(const std::string& report_path, const Settings& settings,
              const std::string& backend_kind, const std::string& output,
              const std::string& audit_path) {
  auto report = ParseReportJson(ReadInput(report_path), settings);
  IndexHandle index;
  BuildIndex(settings, index);
  BackendHandle backend;
  NewBackend(settings.BackendConfig(backend_kind), backend);
  EngineHandle engine;
  NewEngine(index, backend, settings, engine);
  char* result = nullptr;
  char* audit = nullptr;
  Check(ct_engine_triage(engine.ptr, report.c_str(), &result,
                         audit_path.empty() ? nullptr : &audit));
  auto result_text = Take(result);
  if (!audit_path.empty()) {
    auto audit_text = Take(audit);
    std::ofstream out(audit_path, std::ios::binary);
    if (!out || !(out << audit_text)) throw CliError("IoFailure", "cannot write " + audit_path);
  }
  WriteOutput(output, result_text);
  return ExitForResult(result_text);
}

int CmdReplayVerify(const std::string& audit_path, const Settings& settings,
                    const std::string& output) {
  auto audit = ReadInput(audit_path);
  IndexHandle index;
  BuildIndex(settings, index);
  BackendHandle backend;
  NewBackend(json{{"kind", "offline"}}, backend);
  EngineHandle engine;
  NewEngine(index, backend, settings, engine);
  char* out = nullptr;
  Check(ct_engine_replay_verify(engine.ptr, audit.c_str(), &out));
  auto text = Take(out);
  WriteOutput(output, text);
  return json::parse(text).value("mismatched", 0) == 0 ? kExitOk : kExitDegraded;
}

struct EvalArgs {
  std::string reports_dir;
  std::string truth_dir;
  std::string cassette_dir;
  std::string results_dir;
  std::string output;
  std::string text_output;
};

json FailedCase(const std::string& bug_id, const std::string& category,
                const std::string& reason) {
  return {{"bug_id", bug_id},
          {"category", category},
          {"correctness", "Wrong"},
          {"reason", reason}};
}

// One report of a batch. Never throws; failures become Wrong cases.
json EvalOne(const fs::path& report_file, const EvalArgs& args, const Settings& settings,
             const IndexHandle& index, const ct_backend* shared_backend) {
  auto bug_id = report_file.stem().string();
  std::string category = "other";
  try {
    auto report = ParseReportJson(ReadInput(report_file.string()), settings);
    category = json::parse(report).value("bug_category", "other");
    auto truth_path = fs::path(args.truth_dir) / (bug_id + ".json");
    if (!fs::exists(truth_path)) {
      return FailedCase(bug_id, category, "GroundTruthMissing: no " + truth_path.string());
    }
    auto truth = ReadInput(truth_path.string());

    BackendHandle own_backend;
    const ct_backend* backend = shared_backend;
    if (!args.cassette_dir.empty()) {
      auto cassette = fs::path(args.cassette_dir) / (bug_id + ".jsonl");
      json cfg = {{"kind", "scripted"}, {"cassette", cassette.string()}, {"strict", false}};
      NewBackend(cfg, own_backend);
      backend = own_backend.ptr;
    }
    EngineHandle engine;
    Check(ct_engine_new(index.ptr, const_cast<ct_backend*>(backend),
                        settings.EngineConfig().dump().c_str(), &engine.ptr));
    char* result = nullptr;
    char* audit = nullptr;
    Check(ct_engine_triage(engine.ptr, report.c_str(), &result,
                           args.results_dir.empty() ? nullptr : &audit));
    auto result_text = Take(result);
    if (!args.results_dir.empty()) {
      auto audit_text = Take(audit);
      WriteOutput((fs::path(args.results_dir) / (bug_id + ".triage.json")).string(),
                  result_text);
      std::ofstream((fs::path(args.results_dir) / (bug_id + ".audit.jsonl")),
                    std::ios::binary)
          << audit_text;
    }
    char* cls = nullptr;
    Check(ct_classify(index.ptr, result_text.c_str(), truth.c_str(), &cls));
    auto correctness = json::parse(Take(cls)).at("correctness");
    return {{"bug_id", bug_id},
            {"triage", json::parse(result_text)},
            {"correctness", correctness}};
  } catch (const CliError& e) {
    return FailedCase(bug_id, category, e.status + ": " + e.what());
  } catch (const std::exception& e) {
    return FailedCase(bug_id, category, std::string("Internal: ") + e.what());
  }
}

int CmdEval(const EvalArgs& args, const Settings& settings) {
  std::vector<fs::path> reports;
  if (!fs::is_directory(args.reports_dir)) {
    throw CliError("IoFailure", "not a directory: " + args.reports_dir);
  }
  for (const auto& entry : fs::directory_iterator(args.reports_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      reports.push_back(entry.path());
    }
  }
  std::sort(reports.begin(), reports.end());
  if (!args.results_dir.empty()) fs::create_directories(args.results_dir);

  IndexHandle index;
  BuildIndex(settings, index);
  BackendHandle shared;
  if (args.cassette_dir.empty()) NewBackend(settings.BackendConfig(), shared);

  std::vector<json> cases(reports.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < reports.size(); i = next++) {
      cases[i] = EvalOne(reports[i], args, settings, index, shared.ptr);
    }
  };
  std::vector<std::thread> pool;
  int workers = std::min<int>(settings.Workers(), std::max<std::size_t>(1, reports.size()));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  char* summary = nullptr;
  char* tables = nullptr;
  Check(ct_summarize(json(cases).dump().c_str(), &summary, &tables));
  auto summary_text = Take(summary);
  auto tables_text = Take(tables);
  if (!args.output.empty()) WriteOutput(args.output, summary_text);
  if (!args.text_output.empty()) WriteOutput(args.text_output, tables_text);
  std::cout << tables_text;
  if (reports.empty()) {
    throw CliError("InvalidArgument", "no reports (*.txt) in " + args.reports_dir);
  }
  return kExitOk;
}

void PrintError(const std::string& status, const std::string& message) {
  std::cerr << json{{"error", {{"status", status}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crash triage with verified pseudo-code execution", "crashtriage-cli"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ct_version()));

  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "key = value config file");
    sub->add_option("--source", flags.source, "Source tree root");
    sub->add_option("--skip-prefix", flags.skip_prefixes,
                    "Frame prefix to skip when locating the crash frame (repeatable)");
    sub->add_option("--index-cache", flags.index_cache, "index.v1 cache file");
  };
  auto add_engine = [&](CLI::App* sub) {
    sub->add_option("--backend", flags.backend, "http, scripted or record")
        ->check(CLI::IsMember({"http", "scripted", "record"}));
    sub->add_option("--cassette", flags.cassette, "Cassette file (scripted, record)");
    sub->add_flag("--strict", flags.strict, "Scripted backend: require prompt hash matches");
    sub->add_option("--endpoint", flags.endpoint, "Chat completions base URL");
    sub->add_option("--api-key", flags.api_key, "API key");
    sub->add_option("--model", flags.model, "Model name");
    sub->add_option("--timeout", flags.timeout_seconds, "HTTP timeout in seconds");
    sub->add_option("--retry-cap", flags.retry_cap, "Re-analyses per step");
    sub->add_option("--max-depth", flags.max_depth, "Maximum taint steps");
    sub->add_flag("--no-verification", flags.no_verification,
                  "Accept replies without execution verification");
    sub->add_option("--program-dir", flags.program_dir, "Directory of *.prog files");
    sub->add_option("--spec-dir", flags.spec_dir, "Directory of *.spec files");
  };

  std::string input, output, audit_path, index_root;
  EvalArgs eval;

  auto* parse = app.add_subcommand("parse", "Parse a crash report into report.v1 JSON");
  parse->add_option("report", input, "Report file or '-'")->required();
  parse->add_option("-o,--output", output, "Output file");
  add_common(parse);

  auto* index = app.add_subcommand("index", "Index a source tree and print statistics");
  index->add_option("root", index_root, "Source tree root")->required();
  add_common(index);

  auto* triage = app.add_subcommand("triage", "Triage one crash report");
  triage->add_option("report", input, "Report file or '-'")->required();
  triage->add_option("-o,--output", output, "triage.v1 output file");
  triage->add_option("--audit", audit_path, "audit.v1 JSONL output file");
  add_common(triage);
  add_engine(triage);

  auto* record = app.add_subcommand("record", "Triage over HTTP and write a cassette");
  record->add_option("report", input, "Report file or '-'")->required();
  record->add_option("-o,--output", output, "triage.v1 output file");
  record->add_option("--audit", audit_path, "audit.v1 JSONL output file");
  add_common(record);
  add_engine(record);

  auto* ev = app.add_subcommand("eval", "Triage a batch and summarize accuracy");
  ev->add_option("--reports", eval.reports_dir, "Directory of <bug>.txt reports")->required();
  ev->add_option("--truth", eval.truth_dir, "Directory of <bug>.json patch truth")->required();
  ev->add_option("--cassettes", eval.cassette_dir,
                 "Directory of <bug>.jsonl cassettes; selects the scripted backend");
  ev->add_option("--results", eval.results_dir, "Write per-bug triage and audit files here");
  ev->add_option("-o,--output", eval.output, "summary.v1 output file");
  ev->add_option("--tables", eval.text_output, "Text table output file");
  ev->add_option("--workers", flags.workers, "Parallel sessions");
  add_common(ev);
  add_engine(ev);

  auto* replay = app.add_subcommand("replay-verify", "Re-verify a stored audit log");
  replay->add_option("audit", input, "audit.v1 JSONL file or '-'")->required();
  replay->add_option("-o,--output", output, "replay.v1 output file");
  add_common(replay);
  replay->add_option("--spec-dir", flags.spec_dir, "Directory of *.spec files");
  replay->add_option("--program-dir", flags.program_dir, "Directory of *.prog files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*index) flags.source = index_root;
    Settings settings(flags);
    if (*parse) return CmdParse(input, settings, output);
    if (*index) return CmdIndex(settings);
    if (*triage) return CmdTriage(input, settings, "", output, audit_path);
    if (*record) return CmdTriage(input, settings, "record", output, audit_path);
    if (*ev) return CmdEval(eval, settings);
    if (*replay) return CmdReplayVerify(input, settings, output);
  } catch (const CliError& e) {
    PrintError(e.status, e.what());
  } catch (const std::exception& e) {
    PrintError("Internal", e.what());
  }
  return kExitError;
}
