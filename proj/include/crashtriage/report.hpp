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

// Parsing of KASAN-style kernel crash reports.
//
// A report looks roughly like
//
//   BUG: KASAN: null-ptr-deref in trylock_buffer include/linux/buffer_head.h:399
//   Write of size 8 at addr 0000000000000000 by task syz-executor.0/5071
//   ...
//   Call Trace:
//    <TASK>
//    kasan_report+0xec/0x130 mm/kasan/report.c:572
//    trylock_buffer include/linux/buffer_head.h:399 [inline]
//    lock_buffer include/linux/buffer_head.h:405 [inline]
//    ...
//
// The first "Call Trace:" block after the header is the primary trace. Frames
// at its top that belong to the sanitizer itself are skipped when locating
// the crash frame.

#ifndef CRASHTRIAGE_REPORT_HPP_
#define CRASHTRIAGE_REPORT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace crashtriage {

enum class BugCategory {
  kStackOutOfBounds,
  kSlabOutOfBounds,
  kGlobalOutOfBounds,
  kInvalidFree,
  kDoubleFree,
  kUseAfterFree,
  kNullPtrDeref,
  kOther,
};

// Canonical labels: "stack-out-of-bounds", ..., "null-ptr-def", "other".
std::string_view BugCategoryName(BugCategory category);
std::optional<BugCategory> BugCategoryFromName(std::string_view name);

struct Frame {
  std::string function;
  std::optional<std::string> file;
  std::optional<int> line;
  // Everything on the frame line after the function name, e.g.
  // "+0xec/0x130 mm/kasan/report.c:572" or " include/x.h:399 [inline]".
  std::optional<std::string> offset_info;

  bool operator==(const Frame&) const = default;
};

struct NamedTrace {
  std::string name;
  std::vector<Frame> frames;

  bool operator==(const NamedTrace&) const = default;
};

struct CrashReport {
  BugCategory bug_category = BugCategory::kOther;
  // Only meaningful for kOther, e.g. "KMSAN: uninit-value".
  std::string category_label;
  std::string title;
  std::vector<Frame> call_trace;
  std::size_t crash_frame_index = 0;
  std::vector<NamedTrace> aux_traces;
  std::string raw_text;

  bool operator==(const CrashReport&) const = default;

  std::string CategoryString() const;
};

std::vector<std::string> DefaultSkipPrefixes();

// Throws Error{kMalformedReport} when no recognizable header exists and
// Error{kEmptyTrace} when the header has no usable frames after it.
CrashReport ParseReport(std::string_view raw,
                        const std::vector<std::string>& skip_prefixes);

inline CrashReport ParseReport(std::string_view raw) {
  return ParseReport(raw, DefaultSkipPrefixes());
}

const Frame& CrashFrame(const CrashReport& report);

// Index of the first frame at or after `from` whose function is `name`.
std::optional<std::size_t> FindFrame(const CrashReport& report,
                                     std::string_view name,
                                     std::size_t from = 0);

bool HasSkipPrefix(std::string_view function,
                   const std::vector<std::string>& skip_prefixes);

// report.v1
nlohmann::json ToJson(const Frame& frame);
nlohmann::json ToJson(const CrashReport& report);
Frame FrameFromJson(const nlohmann::json& j);
CrashReport ReportFromJson(const nlohmann::json& j);

}  // namespace crashtriage

#endif  // CRASHTRIAGE_REPORT_HPP_
