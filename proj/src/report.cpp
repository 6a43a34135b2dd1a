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

#include "crashtriage/report.hpp"

#include <array>
#include <regex>

#include "crashtriage/error.hpp"
#include "crashtriage/text.hpp"

namespace crashtriage {

namespace {

constexpr std::array<std::pair<BugCategory, std::string_view>, 8>
    kCategoryNames = {{
        {BugCategory::kStackOutOfBounds, "stack-out-of-bounds"},
        {BugCategory::kSlabOutOfBounds, "slab-out-of-bounds"},
        {BugCategory::kGlobalOutOfBounds, "global-out-of-bounds"},
        {BugCategory::kInvalidFree, "invalid-free"},
        {BugCategory::kDoubleFree, "double-free"},
        {BugCategory::kUseAfterFree, "use-after-free"},
        {BugCategory::kNullPtrDeref, "null-ptr-def"},
        {BugCategory::kOther, "other"},
    }};

// Console timestamps and log levels that syzbot and dmesg prepend, e.g.
// "[   12.345678][ T5071] " or "<4>[  263.857834] ".
const std::regex& LinePrefixRe() {
  static const std::regex re(
      R"(^(?:<\d>)?\[\s*\d+\.\d+\](?:\[\s*[TC]\d+\])?)");
  return re;
}

const std::regex& FrameRe() {
  // 1: speculative marker, 2: function, 3: offset, 4: module,
  // 5: file, 6: line.
  static const std::regex re(
      R"(^\s*(\?\s+)?(?:\[<[0-9a-fA-F]+>\]\s*)?)"
      R"(([A-Za-z_][A-Za-z0-9_.]*))"
      R"((\+0x[0-9a-fA-F]+/0x[0-9a-fA-F]+)?)"
      R"((?:\s+\[([A-Za-z0-9_]+)\])?)"
      R"((?:\s+([^\s:\[\]]+):(\d+)(?::\d+)?)?)"
      R"((?:\s+\[inline\])?\s*$)");
  return re;
}

const std::regex& TraceStartRe() {
  static const std::regex re(R"(^\s*(?:Call Trace|Call trace|Backtrace):\s*$)");
  return re;
}

const std::regex& AuxStartRe() {
  static const std::regex re(
      R"(^\s*((?:Allocated by task|Freed by task|Last potentially related)"
      R"( work creation|Second to last potentially related work creation)"
      R"()[^:]*):\s*$)");
  return re;
}

const std::regex& KernelRipRe() {
  static const std::regex re(R"(^\s*RIP:\s*0010:(.*)$)");
  return re;
}

std::string StripLinePrefix(const std::string& line) {
  std::smatch m;
  if (std::regex_search(line, m, LinePrefixRe())) {
    return line.substr(static_cast<std::size_t>(m.length(0)));
  }
  return line;
}

bool IsBoundaryMarker(std::string_view line) {
  auto t = text::Trim(line);
  return t == "<TASK>" || t == "</TASK>" || t == "<IRQ>" || t == "</IRQ>" ||
         t == "<NMI>" || t == "</NMI>" || t == "<EOI>" || t == "<SOFTIRQ>" ||
         t == "</SOFTIRQ>";
}

// Frame lines need at least an offset or a file:line to be told apart from
// ordinary prose.
std::optional<std::pair<Frame, bool>> ParseFrameLine(const std::string& line) {
  std::smatch m;
  if (!std::regex_match(line, m, FrameRe())) return std::nullopt;
  if (!m[3].matched && !m[5].matched) return std::nullopt;
  Frame f;
  f.function = m[2].str();
  if (m[5].matched) {
    f.file = m[5].str();
    f.line = std::stoi(m[6].str());
  }
  auto suffix_at = static_cast<std::size_t>(m.position(2) + m.length(2));
  auto suffix = text::Trim(std::string_view(line).substr(suffix_at));
  if (!suffix.empty()) f.offset_info = std::string(suffix);
  bool speculative = m[1].matched;
  return std::make_pair(std::move(f), speculative);
}

struct Header {
  BugCategory category = BugCategory::kOther;
  std::string label;
};

BugCategory KasanCategory(std::string_view kind, std::string* label) {
  if (kind.find("null-ptr-deref") != std::string_view::npos) {
    return BugCategory::kNullPtrDeref;
  }
  if (kind == "stack-out-of-bounds") return BugCategory::kStackOutOfBounds;
  if (kind == "slab-out-of-bounds") return BugCategory::kSlabOutOfBounds;
  if (kind == "global-out-of-bounds") return BugCategory::kGlobalOutOfBounds;
  if (kind.size() >= 14 &&
      kind.substr(kind.size() - 14) == "use-after-free") {
    return BugCategory::kUseAfterFree;
  }
  // Older kernels print "double-free or invalid-free" for both.
  if (kind == "double-free or invalid-free" || kind == "invalid-free") {
    return BugCategory::kInvalidFree;
  }
  if (kind == "double-free") return BugCategory::kDoubleFree;
  *label = "KASAN: " + std::string(kind);
  return BugCategory::kOther;
}

// Text between `after` and the first " in " (or end of line).
std::string_view KindAfter(std::string_view line, std::size_t after) {
  auto rest = line.substr(after);
  auto in = rest.find(" in ");
  auto on = rest.find(" on ");
  auto cut = std::min(in, on);
  return text::Trim(rest.substr(0, cut));
}

std::optional<Header> MatchHeader(std::string_view line) {
  auto t = text::Trim(line);
  Header h;
  if (auto at = t.find("BUG: KASAN: "); at != std::string_view::npos) {
    h.category = KasanCategory(KindAfter(t, at + 12), &h.label);
    return h;
  }
  if (t.find("general protection fault") != std::string_view::npos ||
      t.find("BUG: kernel NULL pointer dereference") !=
          std::string_view::npos) {
    h.category = BugCategory::kNullPtrDeref;
    return h;
  }
  for (std::string_view family : {"KMSAN: ", "KCSAN: ", "KFENCE: "}) {
    auto marker = std::string("BUG: ") + std::string(family);
    if (auto at = t.find(marker); at != std::string_view::npos) {
      h.label = std::string(family) +
                std::string(KindAfter(t, at + marker.size()));
      return h;
    }
  }
  if (auto at = t.find("UBSAN: "); at != std::string_view::npos) {
    h.label = "UBSAN: " + std::string(KindAfter(t, at + 7));
    return h;
  }
  if (text::StartsWith(t, "BUG: ") || text::StartsWith(t, "kernel BUG at ") ||
      text::StartsWith(t, "WARNING: ")) {
    h.label = std::string(KindAfter(t, 0));
    return h;
  }
  return std::nullopt;
}

// Collects frames following a block header at lines[start]. Returns the index
// of the first line after the block.
std::size_t CollectFrames(const std::vector<std::string>& lines,
                          std::size_t start, std::vector<Frame>* frames) {
  std::size_t i = start;
  for (; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (IsBoundaryMarker(line)) continue;
    auto parsed = ParseFrameLine(line);
    if (!parsed) break;
    if (parsed->second) continue;  // "? foo+0x1/0x2" unwinder guesses
    frames->push_back(std::move(parsed->first));
  }
  return i;
}

}  // namespace

std::string_view BugCategoryName(BugCategory category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  return "other";
}

std::optional<BugCategory> BugCategoryFromName(std::string_view name) {
  for (const auto& [c, n] : kCategoryNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::string CrashReport::CategoryString() const {
  if (bug_category == BugCategory::kOther && !category_label.empty()) {
    return category_label;
  }
  return std::string(BugCategoryName(bug_category));
}

std::vector<std::string> DefaultSkipPrefixes() {
  return {"kasan_",         "__kasan",       "__asan",
          "asan_",          "kmsan_",        "__msan",
          "ubsan_",         "__ubsan",       "check_memory_region",
          "check_region",   "instrument_",   "dump_stack",
          "__dump_stack",   "show_stack",    "print_report",
          "print_address_description",       "end_report",
          "start_report",   "memcpy",        "__memcpy",
          "memset",         "__memset",      "memmove",
          "__memmove"};
}

bool HasSkipPrefix(std::string_view function,
                   const std::vector<std::string>& skip_prefixes) {
  for (const auto& p : skip_prefixes) {
    if (!p.empty() && text::StartsWith(function, p)) return true;
  }
  return false;
}

CrashReport ParseReport(std::string_view raw,
                        const std::vector<std::string>& skip_prefixes) {
  if (text::Trim(raw).empty()) {
    throw Error(ErrorCode::kMalformedReport, "empty report");
  }
  std::vector<std::string> lines;
  for (auto& l : text::SplitLines(raw)) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(StripLinePrefix(l));
  }

  CrashReport report;
  report.raw_text = std::string(raw);

  std::size_t header_at = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (auto h = MatchHeader(lines[i])) {
      header_at = i;
      report.bug_category = h->category;
      report.category_label = h->label;
      report.title = std::string(text::Trim(lines[i]));
      break;
    }
  }
  if (header_at == lines.size()) {
    throw Error(ErrorCode::kMalformedReport, "no recognizable report header");
  }

  std::vector<Frame> rip_frames;
  bool primary_seen = false;
  int extra_traces = 0;
  for (std::size_t i = header_at + 1; i < lines.size();) {
    const auto& line = lines[i];
    std::smatch m;
    if (!primary_seen && std::regex_match(line, m, KernelRipRe())) {
      if (auto f = ParseFrameLine(" " + m[1].str())) {
        rip_frames.push_back(std::move(f->first));
      }
      ++i;
      continue;
    }
    if (std::regex_match(line, TraceStartRe())) {
      std::vector<Frame> frames;
      std::size_t next = CollectFrames(lines, i + 1, &frames);
      if (!primary_seen) {
        primary_seen = true;
        report.call_trace = std::move(rip_frames);
        report.call_trace.insert(report.call_trace.end(), frames.begin(),
                                 frames.end());
      } else {
        report.aux_traces.push_back(
            {"Call Trace #" + std::to_string(++extra_traces + 1),
             std::move(frames)});
      }
      i = next;
      continue;
    }
    if (std::regex_match(line, m, AuxStartRe())) {
      std::vector<Frame> frames;
      std::size_t next = CollectFrames(lines, i + 1, &frames);
      report.aux_traces.push_back(
          {std::string(text::Trim(m[1].str())), std::move(frames)});
      i = next;
      continue;
    }
    ++i;
  }
  if (!primary_seen) report.call_trace = std::move(rip_frames);

  if (report.call_trace.empty()) {
    throw Error(ErrorCode::kEmptyTrace, "report has no call trace frames");
  }
  bool found = false;
  for (std::size_t i = 0; i < report.call_trace.size(); ++i) {
    if (!HasSkipPrefix(report.call_trace[i].function, skip_prefixes)) {
      report.crash_frame_index = i;
      found = true;
      break;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kEmptyTrace,
                "every call trace frame belongs to the sanitizer");
  }
  return report;
}

const Frame& CrashFrame(const CrashReport& report) {
  return report.call_trace.at(report.crash_frame_index);
}

std::optional<std::size_t> FindFrame(const CrashReport& report,
                                     std::string_view name, std::size_t from) {
  for (std::size_t i = from; i < report.call_trace.size(); ++i) {
    if (report.call_trace[i].function == name) return i;
  }
  return std::nullopt;
}

nlohmann::json ToJson(const Frame& frame) {
  nlohmann::json j;
  j["function"] = frame.function;
  j["file"] = frame.file ? nlohmann::json(*frame.file) : nlohmann::json();
  j["line"] = frame.line ? nlohmann::json(*frame.line) : nlohmann::json();
  j["offset_info"] =
      frame.offset_info ? nlohmann::json(*frame.offset_info) : nlohmann::json();
  return j;
}

nlohmann::json ToJson(const CrashReport& report) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& f : report.call_trace) trace.push_back(ToJson(f));
  nlohmann::json aux = nlohmann::json::array();
  for (const auto& t : report.aux_traces) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : t.frames) frames.push_back(ToJson(f));
    aux.push_back({{"name", t.name}, {"frames", std::move(frames)}});
  }
  return {
      {"schema", "report.v1"},
      {"bug_category", std::string(BugCategoryName(report.bug_category))},
      {"category_label", report.category_label},
      {"title", report.title},
      {"call_trace", std::move(trace)},
      {"trace_length", report.call_trace.size()},
      {"crash_frame_index", report.crash_frame_index},
      {"aux_traces", std::move(aux)},
      {"raw_text", report.raw_text},
  };
}

Frame FrameFromJson(const nlohmann::json& j) {
  Frame f;
  f.function = j.at("function").get<std::string>();
  if (j.contains("file") && !j["file"].is_null()) {
    f.file = j["file"].get<std::string>();
  }
  if (j.contains("line") && !j["line"].is_null()) f.line = j["line"].get<int>();
  if (j.contains("offset_info") && !j["offset_info"].is_null()) {
    f.offset_info = j["offset_info"].get<std::string>();
  }
  return f;
}

CrashReport ReportFromJson(const nlohmann::json& j) {
  CrashReport r;
  auto cat = BugCategoryFromName(j.at("bug_category").get<std::string>());
  if (!cat) throw Error(ErrorCode::kInvalidArgument, "unknown bug_category");
  r.bug_category = *cat;
  r.category_label = j.value("category_label", "");
  r.title = j.value("title", "");
  for (const auto& f : j.at("call_trace")) {
    r.call_trace.push_back(FrameFromJson(f));
  }
  r.crash_frame_index = j.at("crash_frame_index").get<std::size_t>();
  if (j.contains("aux_traces")) {
    for (const auto& t : j["aux_traces"]) {
      NamedTrace nt;
      nt.name = t.at("name").get<std::string>();
      for (const auto& f : t.at("frames")) nt.frames.push_back(FrameFromJson(f));
      r.aux_traces.push_back(std::move(nt));
    }
  }
  r.raw_text = j.value("raw_text", "");
  if (r.call_trace.empty() || r.crash_frame_index >= r.call_trace.size()) {
    throw Error(ErrorCode::kInvalidArgument, "report.v1 has an invalid trace");
  }
  return r;
}

}  // namespace crashtriage
