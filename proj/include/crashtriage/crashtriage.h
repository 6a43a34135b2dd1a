/*
 * Copyright 2026 The crashtriage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of libcrashtriage.
 *
 * Conventions:
 *  - Every fallible call returns ct_status; CT_OK is 0. On failure the
 *    message is available from ct_last_error() on the same thread until the
 *    next call.
 *  - Strings returned through char** are NUL-terminated, owned by the
 *    caller and released with ct_string_free(). Outputs are untouched on
 *    failure.
 *  - Structured data crosses the boundary as JSON text (report.v1,
 *    index-stats.v1, triage.v1, audit.v1 lines, summary.v1, replay.v1).
 *  - Handles are opaque. An index and a backend may be shared by several
 *    engines and used from several threads; each must outlive every engine
 *    that uses it.
 */

#ifndef CRASHTRIAGE_H_
#define CRASHTRIAGE_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CT_API __attribute__((visibility("default")))
#else
#define CT_API
#endif

typedef enum ct_status {
  CT_OK = 0,
  CT_INVALID_ARGUMENT = 1,
  CT_MALFORMED_REPORT = 2,
  CT_EMPTY_TRACE = 3,
  CT_IO_FAILURE = 4,
  CT_FILE_NOT_IN_INDEX = 5,
  CT_OUT_OF_RANGE = 6,
  CT_BACKEND_UNAVAILABLE = 7,
  CT_RESPONSE_TRUNCATED = 8,
  CT_FORMAT_FAILED = 9,
  CT_SPEC_INVALID = 10,
  CT_SPEC_MISMATCH = 11,
  CT_MISSING_BINDING = 12,
  CT_MISSING_SOURCE = 13,
  CT_RETRIEVAL_FAILED = 14,
  CT_VARIABLE_UNIDENTIFIED = 15,
  CT_GROUND_TRUTH_MISSING = 16,
  CT_PROGRAM_INVALID = 17,
  CT_INTERNAL = 99
} ct_status;

typedef struct ct_index ct_index;
typedef struct ct_backend ct_backend;
typedef struct ct_engine ct_engine;

CT_API const char* ct_version(void);
CT_API const char* ct_status_name(ct_status status);
CT_API const char* ct_last_error(void);
CT_API void ct_string_free(char* s);

/* skip_prefixes_json: JSON array of strings, or NULL for the defaults. */
CT_API ct_status ct_parse_report(const char* raw, const char* skip_prefixes_json,
                                 char** out_report_json);

/*
 * options_json (may be NULL):
 *   {"globs": ["*.c", ...], "cache": "path/index.v1.json", "threads": 0}
 */
CT_API ct_status ct_index_build(const char* root, const char* options_json,
                                ct_index** out_index);
CT_API void ct_index_free(ct_index* index);
CT_API ct_status ct_index_stats(const ct_index* index, char** out_json);
/* names_json: JSON array of identifiers. Result maps name -> source. */
CT_API ct_status ct_index_retrieve(const ct_index* index, const char* names_json,
                                   char** out_json);
CT_API ct_status ct_index_line_text(const ct_index* index, const char* file,
                                    int line, char** out_text);

/*
 * config_json:
 *   {"kind": "scripted", "cassette": "path", "strict": false}
 *   {"kind": "http", "base_url": "...", "api_key": "...", "model": "...",
 *    "timeout_seconds": 300}
 *   {"kind": "record", "cassette": "path", <http keys>}
 *   {"kind": "offline"}  (every completion fails; for replay-verify)
 */
CT_API ct_status ct_backend_new(const char* config_json, ct_backend** out_backend);
CT_API void ct_backend_free(ct_backend* backend);
/* {"id": "...", "remaining": n, "drift": n}; counts only for scripted. */
CT_API ct_status ct_backend_stats(const ct_backend* backend, char** out_json);

/*
 * config_json (may be NULL):
 *   {"program_dir": "...", "spec_dir": "...", "retry_cap": 10,
 *    "max_depth": 24, "verification": true, "max_output_tokens": 4096,
 *    "identify_attempts": 2, "temperature": {"base": 0, "step": 0.2,
 *    "cap": 2}}
 * program_dir and spec_dir default to the data directory of the build.
 */
CT_API ct_status ct_engine_new(const ct_index* index, ct_backend* backend,
                               const char* config_json, ct_engine** out_engine);
CT_API void ct_engine_free(ct_engine* engine);
/*
 * report_json: a report.v1 document. On CT_OK *out_result_json holds
 * triage.v1 and, when out_audit_jsonl is not NULL, *out_audit_jsonl holds
 * audit.v1 events, one per line.
 */
CT_API ct_status ct_engine_triage(const ct_engine* engine, const char* report_json,
                                  char** out_result_json, char** out_audit_jsonl);
/* Re-verifies a stored audit log. Output: replay.v1. */
CT_API ct_status ct_engine_replay_verify(const ct_engine* engine,
                                         const char* audit_jsonl, char** out_json);

/*
 * Classifies a triage.v1 result against {"bug_id": ..., "patched_functions":
 * [{"name": ..., "file": ...}]}. Output: {"correctness": "Function"|...}.
 */
CT_API ct_status ct_classify(const ct_index* index, const char* result_json,
                             const char* truth_json, char** out_json);

/*
 * cases_json: array of case records ({"bug_id", "category", "correctness",
 * "executions", ...}) or of {"bug_id", "triage": <triage.v1>,
 * "correctness"}. Produces summary.v1 and, if requested, text tables.
 */
CT_API ct_status ct_summarize(const char* cases_json, char** out_summary_json,
                              char** out_text);

CT_API double ct_temperature_for(double base, double step, double cap, int attempt);

#ifdef __cplusplus
}
#endif

#endif /* CRASHTRIAGE_H_ */
