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

#include "crashtriage/crashtriage.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "crashtriage/agent.hpp"
#include "crashtriage/error.hpp"
#include "crashtriage/esv.hpp"
#include "crashtriage/llm.hpp"
#include "crashtriage/metrics.hpp"
#include "crashtriage/pcx.hpp"
#include "crashtriage/report.hpp"
#include "crashtriage/retrieval.hpp"
#include "crashtriage/text.hpp"

#ifndef CRASHTRIAGE_DATA_DIR
#define CRASHTRIAGE_DATA_DIR "data"
#endif
#ifndef CRASHTRIAGE_VERSION
#define CRASHTRIAGE_VERSION "0.0.0"
#endif

using crashtriage::Error;
using crashtriage::ErrorCode;
using nlohmann::json;

struct ct_index {
  crashtriage::SourceIndex index;
};

struct ct_backend {
  std::unique_ptr<crashtriage::Backend> inner;  // the recorder's target
  std::unique_ptr<crashtriage::Backend> backend;
  crashtriage::ScriptedBackend* scripted = nullptr;
};

struct ct_engine {
  std::unique_ptr<crashtriage::Triager> triager;
};

namespace {

thread_local std::string g_last_error;

ct_status Fail(ct_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
ct_status Guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return CT_OK;
  } catch (const Error& e) {
    return Fail(static_cast<ct_status>(static_cast<int>(e.code())), e.what());
  } catch (const json::exception& e) {
    return Fail(CT_INVALID_ARGUMENT, std::string("invalid JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return Fail(CT_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(CT_INTERNAL, e.what());
  }
}

char* Dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void Require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

json ParseJson(const char* text, const char* what) {
  auto j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is not valid JSON");
  }
  return j;
}

crashtriage::HttpConfig HttpFromJson(const json& j) {
  crashtriage::HttpConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.api_key = j.value("api_key", c.api_key);
  c.model = j.value("model", c.model);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  return c;
}

// Backs engines that never call a model, such as replay verification.
class OfflineBackend : public crashtriage::Backend {
 public:
  crashtriage::LlmResponse Complete(const crashtriage::LlmRequest&) override {
    throw Error(ErrorCode::kBackendUnavailable, "offline backend cannot complete prompts");
  }
  std::string Id() const override { return "offline"; }
};

json SourceJson(const crashtriage::RetrievedSource& src) {
  auto defs = json::array();
  for (const auto& d : src.definitions) {
    std::string body;
    for (const auto& line : d.lines) {
      body += line;
      body += '\n';
    }
    defs.push_back({{"kind", crashtriage::DefinitionKindName(d.location.kind)},
                    {"file", d.location.file},
                    {"start_line", d.location.start_line},
                    {"end_line", d.location.end_line},
                    {"signature", d.location.signature},
                    {"text", body}});
  }
  return {{"name", src.name},
          {"found", src.found},
          {"ambiguous", src.ambiguous},
          {"definitions", std::move(defs)},
          {"annotated", src.AnnotatedText()}};
}

}  // namespace

extern "C" {

const char* ct_version(void) { return CRASHTRIAGE_VERSION; }

const char* ct_status_name(ct_status status) {
  if (status == CT_OK) return "OK";
  // Storage is static: ErrorCodeName returns views of literals.
  return crashtriage::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

const char* ct_last_error(void) { return g_last_error.c_str(); }

void ct_string_free(char* s) { std::free(s); }

ct_status ct_parse_report(const char* raw, const char* skip_prefixes_json,
                          char** out_report_json) {
  return Guard([&] {
    Require(raw, "raw");
    Require(out_report_json, "out_report_json");
    auto prefixes = crashtriage::DefaultSkipPrefixes();
    if (skip_prefixes_json) {
      prefixes = ParseJson(skip_prefixes_json, "skip_prefixes_json")
                     .get<std::vector<std::string>>();
    }
    auto report = crashtriage::ParseReport(raw, prefixes);
    *out_report_json = Dup(crashtriage::ToJson(report).dump());
  });
}

ct_status ct_index_build(const char* root, const char* options_json,
                         ct_index** out_index) {
  return Guard([&] {
    Require(root, "root");
    Require(out_index, "out_index");
    crashtriage::IndexOptions opts;
    if (options_json) {
      auto j = ParseJson(options_json, "options_json");
      if (j.contains("globs")) opts.file_globs = j["globs"].get<std::vector<std::string>>();
      if (j.contains("cache") && j["cache"].is_string()) opts.cache_path = j["cache"];
      opts.threads = j.value("threads", 0u);
    }
    auto index = crashtriage::SourceIndex::Build(root, opts);
    *out_index = new ct_index{std::move(index)};
  });
}

void ct_index_free(ct_index* index) { delete index; }

ct_status ct_index_stats(const ct_index* index, char** out_json) {
  return Guard([&] {
    Require(index, "index");
    Require(out_json, "out_json");
    *out_json = Dup(index->index.StatsJson().dump());
  });
}

ct_status ct_index_retrieve(const ct_index* index, const char* names_json,
                            char** out_json) {
  return Guard([&] {
    Require(index, "index");
    Require(names_json, "names_json");
    Require(out_json, "out_json");
    auto names = ParseJson(names_json, "names_json").get<std::vector<std::string>>();
    json out = json::object();
    for (const auto& [name, src] : index->index.Retrieve(names)) {
      out[name] = SourceJson(src);
    }
    *out_json = Dup(out.dump());
  });
}

ct_status ct_index_line_text(const ct_index* index, const char* file, int line,
                             char** out_text) {
  return Guard([&] {
    Require(index, "index");
    Require(file, "file");
    Require(out_text, "out_text");
    *out_text = Dup(index->index.LineText(file, line));
  });
}

ct_status ct_backend_new(const char* config_json, ct_backend** out_backend) {
  return Guard([&] {
    Require(config_json, "config_json");
    Require(out_backend, "out_backend");
    auto j = ParseJson(config_json, "config_json");
    auto kind = j.value("kind", "");
    auto b = std::make_unique<ct_backend>();
    if (kind == "scripted") {
      auto cassette = j.value("cassette", "");
      if (cassette.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "scripted backend needs a cassette");
      }
      auto s = crashtriage::ScriptedBackend::FromFile(cassette, j.value("strict", false));
      b->scripted = s.get();
      b->backend = std::move(s);
    } else if (kind == "http") {
      b->backend = std::make_unique<crashtriage::HttpBackend>(HttpFromJson(j));
    } else if (kind == "record") {
      auto cassette = j.value("cassette", "");
      if (cassette.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "record backend needs a cassette");
      }
      b->inner = std::make_unique<crashtriage::HttpBackend>(HttpFromJson(j));
      b->backend = std::make_unique<crashtriage::RecordingBackend>(*b->inner, cassette);
    } else if (kind == "offline") {
      b->backend = std::make_unique<OfflineBackend>();
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown backend kind '" + kind + "'");
    }
    *out_backend = b.release();
  });
}

void ct_backend_free(ct_backend* backend) { delete backend; }

ct_status ct_backend_stats(const ct_backend* backend, char** out_json) {
  return Guard([&] {
    Require(backend, "backend");
    Require(out_json, "out_json");
    json j = {{"id", backend->backend->Id()}};
    if (backend->scripted) {
      j["remaining"] = backend->scripted->remaining();
      j["drift"] = backend->scripted->drift_count();
    }
    *out_json = Dup(j.dump());
  });
}

ct_status ct_engine_new(const ct_index* index, ct_backend* backend,
                        const char* config_json, ct_engine** out_engine) {
  return Guard([&] {
    Require(index, "index");
    Require(backend, "backend");
    Require(out_engine, "out_engine");
    json j = config_json ? ParseJson(config_json, "config_json") : json::object();
    auto config = crashtriage::AgentConfig::FromJson(j);
    std::string data = CRASHTRIAGE_DATA_DIR;
    auto programs = crashtriage::LoadProgramDir(j.value("program_dir", data + "/programs"));
    auto specs = crashtriage::LoadSpecDir(j.value("spec_dir", data + "/specs"));
    auto triager = std::make_unique<crashtriage::Triager>(
        index->index, *backend->backend, std::move(programs), std::move(specs),
        std::move(config));
    *out_engine = new ct_engine{std::move(triager)};
  });
}

void ct_engine_free(ct_engine* engine) { delete engine; }

ct_status ct_engine_triage(const ct_engine* engine, const char* report_json,
                           char** out_result_json, char** out_audit_jsonl) {
  return Guard([&] {
    Require(engine, "engine");
    Require(report_json, "report_json");
    Require(out_result_json, "out_result_json");
    auto report = crashtriage::ReportFromJson(ParseJson(report_json, "report_json"));
    std::vector<json> audit;
    auto result = engine->triager->Triage(report, &audit);
    std::string audit_text;
    for (const auto& ev : audit) {
      audit_text += ev.dump();
      audit_text += '\n';
    }
    auto result_text = result.ToJson().dump(2);
    char* r = Dup(result_text);
    if (out_audit_jsonl) {
      try {
        *out_audit_jsonl = Dup(audit_text);
      } catch (...) {
        std::free(r);
        throw;
      }
    }
    *out_result_json = r;
  });
}

ct_status ct_engine_replay_verify(const ct_engine* engine, const char* audit_jsonl,
                                  char** out_json) {
  return Guard([&] {
    Require(engine, "engine");
    Require(audit_jsonl, "audit_jsonl");
    Require(out_json, "out_json");
    std::vector<json> events;
    for (const auto& line : crashtriage::text::SplitLines(audit_jsonl)) {
      if (crashtriage::text::Trim(line).empty()) continue;
      events.push_back(ParseJson(line.c_str(), "audit line"));
    }
    *out_json = Dup(engine->triager->ReplayVerify(events).dump(2));
  });
}

ct_status ct_classify(const ct_index* index, const char* result_json,
                      const char* truth_json, char** out_json) {
  return Guard([&] {
    Require(index, "index");
    Require(result_json, "result_json");
    Require(out_json, "out_json");
    if (!truth_json) throw Error(ErrorCode::kGroundTruthMissing, "no patch truth given");
    auto result = ParseJson(result_json, "result_json");
    auto truth = crashtriage::PatchTruth::FromJson(ParseJson(truth_json, "truth_json"));
    std::optional<std::string> file;
    if (result.contains("blamed_file") && result["blamed_file"].is_string()) {
      file = result["blamed_file"].get<std::string>();
    }
    auto c = crashtriage::ClassifyCorrectness(
        result.at("blamed_function").get<std::string>(), file, truth, index->index);
    *out_json = Dup(json{{"bug_id", truth.bug_id},
                         {"correctness", crashtriage::CorrectnessName(c)}}
                        .dump());
  });
}

ct_status ct_summarize(const char* cases_json, char** out_summary_json,
                       char** out_text) {
  return Guard([&] {
    Require(cases_json, "cases_json");
    Require(out_summary_json, "out_summary_json");
    auto j = ParseJson(cases_json, "cases_json");
    if (!j.is_array()) throw Error(ErrorCode::kInvalidArgument, "cases_json must be an array");
    std::vector<crashtriage::CaseRecord> cases;
    for (const auto& c : j) {
      if (c.contains("triage")) {
        auto corr = crashtriage::CorrectnessFromName(c.value("correctness", "Wrong"));
        if (!corr) throw Error(ErrorCode::kInvalidArgument, "bad correctness label");
        cases.push_back(crashtriage::CaseRecord::FromTriage(c.value("bug_id", ""),
                                                            c["triage"], *corr));
      } else {
        cases.push_back(crashtriage::CaseRecord::FromJson(c));
      }
    }
    auto summary = crashtriage::Summarize(cases);
    auto out = summary.ToJson();
    auto records = json::array();
    for (const auto& c : cases) records.push_back(c.ToJson());
    out["cases"] = std::move(records);
    char* s = Dup(out.dump(2));
    if (out_text) {
      try {
        *out_text = Dup(summary.TextTables());
      } catch (...) {
        std::free(s);
        throw;
      }
    }
    *out_summary_json = s;
  });
}

double ct_temperature_for(double base, double step, double cap, int attempt) {
  return crashtriage::TemperatureSchedule{base, step, cap}.TemperatureFor(attempt);
}

}  // extern "C"
