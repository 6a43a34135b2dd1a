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

#include "crashtriage/retrieval.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <set>
#include <thread>

#include "crashtriage/error.hpp"
#include "crashtriage/text.hpp"

namespace fs = std::filesystem;

namespace crashtriage {

namespace {

// Returns a copy of `src` with comments, string/char literals and
// preprocessor directives replaced by spaces. Newlines are preserved so
// offsets and line numbers stay aligned with the original.
std::string CodeView(std::string_view src) {
  std::string out(src);
  enum class State { kCode, kLineComment, kBlockComment, kString, kChar };
  State state = State::kCode;
  bool line_start = true;
  bool in_directive = false;
  for (std::size_t i = 0; i < src.size(); ++i) {
    char c = src[i];
    char next = i + 1 < src.size() ? src[i + 1] : '\0';
    if (c == '\n') {
      if (state == State::kLineComment || state == State::kString ||
          state == State::kChar) {
        state = State::kCode;
      }
      bool continued = in_directive && i > 0 && src[i - 1] == '\\';
      in_directive = continued;
      line_start = true;
      continue;
    }
    if (in_directive) {
      out[i] = ' ';
      continue;
    }
    switch (state) {
      case State::kCode:
        if (line_start && c == '#') {
          in_directive = true;
          out[i] = ' ';
          break;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) line_start = false;
        if (c == '/' && next == '/') {
          state = State::kLineComment;
          out[i] = ' ';
        } else if (c == '/' && next == '*') {
          state = State::kBlockComment;
          out[i] = ' ';
          out[++i] = ' ';
        } else if (c == '"') {
          state = State::kString;
          out[i] = ' ';
        } else if (c == '\'') {
          state = State::kChar;
          out[i] = ' ';
        }
        break;
      case State::kLineComment:
        out[i] = ' ';
        break;
      case State::kBlockComment:
        out[i] = ' ';
        if (c == '*' && next == '/') {
          out[++i] = ' ';
          state = State::kCode;
        }
        break;
      case State::kString:
      case State::kChar:
        out[i] = ' ';
        if (c == '\\' && next != '\n' && next != '\0') {
          out[++i] = ' ';
        } else if ((state == State::kString && c == '"') ||
                   (state == State::kChar && c == '\'')) {
          state = State::kCode;
        }
        break;
    }
  }
  return out;
}

struct Token {
  enum class Kind { kIdent, kParen, kPunct };
  Kind kind;
  std::string text;  // for kParen: the content between the parentheses
  std::size_t begin;  // offset in the code view
  std::size_t end;    // one past the last character
};

std::vector<Token> Tokenize(std::string_view code, std::size_t begin,
                            std::size_t end) {
  std::vector<Token> tokens;
  std::size_t i = begin;
  while (i < end) {
    char c = code[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (text::IsIdentChar(c)) {
      std::size_t j = i;
      while (j < end && text::IsIdentChar(code[j])) ++j;
      tokens.push_back({Token::Kind::kIdent, std::string(code.substr(i, j - i)),
                        i, j});
      i = j;
    } else if (c == '(') {
      int depth = 0;
      std::size_t j = i;
      for (; j < end; ++j) {
        if (code[j] == '(') ++depth;
        if (code[j] == ')' && --depth == 0) break;
      }
      if (j >= end) {  // unbalanced; treat the rest as one group
        tokens.push_back({Token::Kind::kParen,
                          std::string(code.substr(i + 1, end - i - 1)), i,
                          end});
        break;
      }
      tokens.push_back({Token::Kind::kParen,
                        std::string(code.substr(i + 1, j - i - 1)), i, j + 1});
      i = j + 1;
    } else {
      tokens.push_back({Token::Kind::kPunct, std::string(1, c), i, i + 1});
      ++i;
    }
  }
  return tokens;
}

bool IsControlKeyword(std::string_view s) {
  static const std::set<std::string_view> kKeywords = {
      "if",     "for",      "while",      "switch",        "return",
      "sizeof", "do",       "else",       "case",          "typeof",
      "__typeof__", "defined", "__attribute__", "__attribute", "alignof",
      "_Alignof", "__declspec", "alignas", "_Alignas", "decltype"};
  return kKeywords.count(s) > 0;
}

// A parenthesised group that could be a parameter list: empty, "void",
// "...", or comma separated parts each carrying a type and usually a name.
bool LooksLikeParams(std::string_view content) {
  auto t = text::Trim(content);
  if (t.empty() || t == "void") return true;
  if (t.front() == '(') return false;  // __attribute__((x))
  int depth = 0;
  std::size_t part_begin = 0;
  auto part_ok = [&](std::string_view part) {
    part = text::Trim(part);
    if (part == "...") return true;
    int words = 0;
    bool pointer = false;
    for (std::size_t i = 0; i < part.size();) {
      if (text::IsIdentChar(part[i])) {
        if (std::isdigit(static_cast<unsigned char>(part[i])) && words == 0) {
          return false;
        }
        while (i < part.size() && text::IsIdentChar(part[i])) ++i;
        ++words;
      } else {
        if (part[i] == '*' || part[i] == '&' || part[i] == '(' ||
            part[i] == '[') {
          pointer = true;
        }
        ++i;
      }
    }
    return words >= 2 || (words >= 1 && pointer);
  };
  for (std::size_t i = 0; i <= t.size(); ++i) {
    if (i == t.size() || (t[i] == ',' && depth == 0)) {
      if (!part_ok(t.substr(part_begin, i - part_begin))) return false;
      part_begin = i + 1;
      continue;
    }
    if (t[i] == '(' || t[i] == '[' || t[i] == '<') ++depth;
    if (t[i] == ')' || t[i] == ']' || t[i] == '>') --depth;
  }
  return true;
}

class LineMap {
 public:
  explicit LineMap(std::string_view s) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '\n') starts_.push_back(i + 1);
    }
  }
  // 1-based line of an offset.
  int LineOf(std::size_t offset) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    return static_cast<int>(it - starts_.begin());
  }

 private:
  std::vector<std::size_t> starts_;
};

enum class HeadKind { kNone, kTransparent, kFunction, kStructure };

struct HeadInfo {
  HeadKind kind = HeadKind::kNone;
  std::string name;          // may be empty for anonymous typedef structs
  bool is_typedef = false;
  std::size_t start = 0;     // code offset where the definition begins
};

HeadInfo ClassifyHead(std::string_view code, std::size_t begin,
                      std::size_t end) {
  HeadInfo info;
  auto tokens = Tokenize(code, begin, end);
  if (tokens.empty()) return info;

  if (tokens[0].kind == Token::Kind::kIdent &&
      (tokens[0].text == "namespace" ||
       (tokens[0].text == "extern" && tokens.size() == 1))) {
    info.kind = HeadKind::kTransparent;
    return info;
  }
  for (const auto& t : tokens) {
    if (t.kind == Token::Kind::kPunct && t.text == "=") return info;
  }

  // Structures: [typedef] struct|union|class [attrs] [name] [: bases]
  std::size_t k = 0;
  if (tokens[k].kind == Token::Kind::kIdent && tokens[k].text == "typedef") {
    info.is_typedef = true;
    ++k;
  }
  if (k < tokens.size() && tokens[k].kind == Token::Kind::kIdent &&
      (tokens[k].text == "struct" || tokens[k].text == "union" ||
       tokens[k].text == "class")) {
    std::string name;
    bool aggregate = true;
    for (std::size_t j = k + 1; j < tokens.size(); ++j) {
      const auto& t = tokens[j];
      if (t.kind == Token::Kind::kIdent) {
        bool attribute = text::StartsWith(t.text, "__") ||
                         t.text == "alignas" || t.text == "_Alignas";
        if (j + 1 < tokens.size() && tokens[j + 1].kind == Token::Kind::kParen) {
          if (!attribute) {
            aggregate = false;  // `struct foo make_foo(void) {`
            break;
          }
          ++j;  // __attribute__((...)), __aligned(8)
          continue;
        }
        if (!attribute) name = t.text;
      } else if (t.kind == Token::Kind::kPunct && t.text == ":") {
        break;  // C++ base clause
      } else {
        aggregate = false;  // `struct foo *get_foo(void) {`
        break;
      }
    }
    if (aggregate) {
      info.kind = HeadKind::kStructure;
      info.name = name;
      info.start = tokens[0].begin;
      return info;
    }
  }

  // Functions: first `ident (params)` pair with at least one type token in
  // front and only qualifiers or attribute groups after.
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i].kind != Token::Kind::kParen) continue;
    const auto& name = tokens[i - 1];
    if (name.kind != Token::Kind::kIdent || IsControlKeyword(name.text)) {
      continue;
    }
    if (!LooksLikeParams(tokens[i].text)) continue;
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      if (tokens[j].kind == Token::Kind::kPunct) return info;
    }
    // A macro invocation ending its own line (no semicolon) is not part of
    // the definition that follows it.
    std::size_t first = 0;
    for (std::size_t j = 0; j + 1 < i - 1; ++j) {
      if (tokens[j].kind != Token::Kind::kParen) continue;
      auto gap = code.substr(tokens[j].end, tokens[j + 1].begin - tokens[j].end);
      if (gap.find('\n') != std::string_view::npos &&
          !LooksLikeParams(tokens[j].text)) {
        first = j + 1;
      }
    }
    if (first >= i - 1) return info;  // no return type: `DEFINE_X(name) {`
    bool has_type = false;
    for (std::size_t j = first; j < i - 1; ++j) {
      if (tokens[j].kind == Token::Kind::kIdent ||
          (tokens[j].kind == Token::Kind::kPunct &&
           (tokens[j].text == "*" || tokens[j].text == "&"))) {
        has_type = true;
      }
    }
    if (!has_type) return info;
    info.kind = HeadKind::kFunction;
    info.name = name.text;
    info.start = tokens[first].begin;
    return info;
  }
  return info;
}

bool GlobMatch(const std::string& pattern, const std::string& rel_path) {
  if (pattern.find('/') == std::string::npos) {
    auto base = rel_path.substr(rel_path.find_last_of('/') + 1);
    return fnmatch(pattern.c_str(), base.c_str(), 0) == 0;
  }
  if (fnmatch(pattern.c_str(), rel_path.c_str(), 0) == 0) return true;
  // "**/x" also matches at the root.
  if (text::StartsWith(pattern, "**/")) {
    return fnmatch(pattern.c_str() + 3, rel_path.c_str(), 0) == 0;
  }
  return false;
}

nlohmann::json LocationJson(const DefinitionLocation& loc) {
  return {{"name", loc.name},
          {"kind", std::string(DefinitionKindName(loc.kind))},
          {"file", loc.file},
          {"start_line", loc.start_line},
          {"end_line", loc.end_line},
          {"signature", loc.signature}};
}

DefinitionLocation LocationFromJson(const nlohmann::json& j) {
  DefinitionLocation loc;
  loc.name = j.at("name").get<std::string>();
  loc.kind = j.at("kind").get<std::string>() == "structure"
                 ? DefinitionKind::kStructure
                 : DefinitionKind::kFunction;
  loc.file = j.at("file").get<std::string>();
  loc.start_line = j.at("start_line").get<int>();
  loc.end_line = j.at("end_line").get<int>();
  loc.signature = j.at("signature").get<std::string>();
  return loc;
}

}  // namespace

std::string_view DefinitionKindName(DefinitionKind kind) {
  return kind == DefinitionKind::kStructure ? "structure" : "function";
}

std::vector<std::string> IndexOptions::DefaultGlobs() {
  return {"*.c", "*.h", "*.cc", "*.cpp", "*.hpp"};
}

std::vector<DefinitionLocation> ScanDefinitions(std::string_view source,
                                                const std::string& file) {
  std::vector<DefinitionLocation> out;
  const std::string code = CodeView(source);
  const LineMap lines_map(code);
  const auto lines = text::SplitLines(source);

  auto emit = [&](const HeadInfo& head, const std::string& name,
                  std::size_t end_offset) {
    if (name.empty() || !text::IsIdentifier(name)) return;
    DefinitionLocation loc;
    loc.name = name;
    loc.kind = head.kind == HeadKind::kStructure ? DefinitionKind::kStructure
                                                 : DefinitionKind::kFunction;
    loc.file = file;
    loc.start_line = lines_map.LineOf(head.start);
    loc.end_line = lines_map.LineOf(end_offset);
    if (static_cast<std::size_t>(loc.start_line) <= lines.size()) {
      loc.signature = lines[static_cast<std::size_t>(loc.start_line - 1)];
      if (!loc.signature.empty() && loc.signature.back() == '\r') {
        loc.signature.pop_back();
      }
    }
    out.push_back(std::move(loc));
  };

  std::size_t head_start = 0;
  int depth = 0;             // depth inside the current top-level definition
  int transparent = 0;       // open namespace / extern "C" blocks
  HeadInfo open_head;        // head of the top-level brace being scanned
  std::optional<HeadInfo> pending_struct;  // waiting for its ';'
  std::size_t struct_close = 0;

  for (std::size_t i = 0; i < code.size(); ++i) {
    char c = code[i];
    if (pending_struct && depth == 0 && (c == ';' || c == '{')) {
      if (c == ';') {
        // Named struct, or `typedef struct {...} name_t;`.
        auto tail = Tokenize(code, struct_close, i);
        std::string alias;
        for (const auto& t : tail) {
          if (t.kind == Token::Kind::kIdent && !text::StartsWith(t.text, "__")) {
            alias = t.text;
          }
        }
        if (!pending_struct->name.empty()) {
          emit(*pending_struct, pending_struct->name, i);
        }
        if (pending_struct->is_typedef && !alias.empty() &&
            alias != pending_struct->name) {
          emit(*pending_struct, alias, i);
        }
        pending_struct.reset();
        head_start = i + 1;
        continue;
      }
      pending_struct.reset();  // `struct x {...} y = {` etc.
    }
    if (c == '{') {
      if (depth == 0) {
        open_head = ClassifyHead(code, head_start, i);
        if (open_head.kind == HeadKind::kTransparent) {
          ++transparent;
          head_start = i + 1;
          continue;
        }
      }
      ++depth;
    } else if (c == '}') {
      if (depth == 0) {
        if (transparent > 0) --transparent;
        head_start = i + 1;
        continue;
      }
      if (--depth == 0) {
        if (open_head.kind == HeadKind::kFunction) {
          emit(open_head, open_head.name, i);
        } else if (open_head.kind == HeadKind::kStructure) {
          pending_struct = open_head;
          struct_close = i + 1;
        }
        open_head = {};
        head_start = i + 1;
      }
    } else if (c == ';' && depth == 0) {
      head_start = i + 1;
    }
  }
  return out;
}

std::optional<std::string_view> RetrievedDefinition::LineAt(int line) const {
  if (line < location.start_line || line > location.end_line) {
    return std::nullopt;
  }
  auto idx = static_cast<std::size_t>(line - location.start_line);
  if (idx >= lines.size()) return std::nullopt;
  return std::string_view(lines[idx]);
}

std::string RetrievedSource::AnnotatedText() const {
  std::string out;
  for (const auto& def : definitions) {
    int n = def.location.start_line;
    for (const auto& l : def.lines) {
      out += def.location.file + ":" + std::to_string(n++) + ": " + l + "\n";
    }
  }
  return out;
}

SourceIndex SourceIndex::Build(const std::string& root,
                               const IndexOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kIoFailure, "not a readable directory: " + root);
  }
  SourceIndex index;
  index.root_ = fs::absolute(root).lexically_normal().generic_string();
  index.globs_ = options.file_globs;

  std::vector<std::string> rel_paths;
  auto it = fs::recursive_directory_iterator(
      root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot scan " + root);
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      index.stats_.warnings.push_back("directory walk: " + ec.message());
      ec.clear();
      continue;
    }
    if (!it->is_regular_file(ec)) continue;
    auto rel = fs::relative(it->path(), root, ec).generic_string();
    for (const auto& g : options.file_globs) {
      if (GlobMatch(g, rel)) {
        rel_paths.push_back(rel);
        break;
      }
    }
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  struct Scanned {
    std::optional<std::string> contents;
    std::string error;
  };
  std::vector<Scanned> scanned(rel_paths.size());
  unsigned workers = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(1, rel_paths.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < rel_paths.size(); k = next++) {
          try {
            scanned[k].contents =
                text::ReadFile((fs::path(root) / rel_paths[k]).string());
          } catch (const Error& e) {
            scanned[k].error = e.what();
          }
        }
      });
    }
  }

  for (std::size_t k = 0; k < rel_paths.size(); ++k) {
    if (!scanned[k].contents) {
      index.stats_.warnings.push_back(scanned[k].error);
      continue;
    }
    FileEntry entry;
    entry.sha256 = text::Sha256Hex(*scanned[k].contents);
    entry.lines = text::SplitLines(*scanned[k].contents);
    for (auto& l : entry.lines) {
      if (!l.empty() && l.back() == '\r') l.pop_back();
    }
    index.files_.emplace(rel_paths[k], std::move(entry));
  }
  index.stats_.files_scanned = index.files_.size();

  // Reuse a cache whose root, globs and file hashes all match.
  if (options.cache_path && fs::exists(*options.cache_path)) {
    try {
      auto cache = nlohmann::json::parse(text::ReadFile(*options.cache_path));
      bool valid = cache.value("schema", "") == "index.v1" &&
                   cache.at("root").get<std::string>() == index.root_ &&
                   cache.at("globs").get<std::vector<std::string>>() ==
                       index.globs_ &&
                   cache.at("files").size() == index.files_.size();
      if (valid) {
        for (const auto& f : cache.at("files")) {
          auto fit = index.files_.find(f.at("path").get<std::string>());
          if (fit == index.files_.end() ||
              fit->second.sha256 != f.at("sha256").get<std::string>()) {
            valid = false;
            break;
          }
        }
      }
      if (valid) {
        for (const auto& [name, locs] : cache.at("entries").items()) {
          for (const auto& l : locs) {
            index.entries_[name].push_back(LocationFromJson(l));
          }
        }
        index.stats_.cache_hit = true;
      }
    } catch (const std::exception& e) {
      index.stats_.warnings.push_back(std::string("ignoring index cache: ") +
                                      e.what());
      index.entries_.clear();
    }
  }

  if (!index.stats_.cache_hit) {
    for (std::size_t k = 0; k < rel_paths.size(); ++k) {
      if (!scanned[k].contents) continue;
      for (auto& loc : ScanDefinitions(*scanned[k].contents, rel_paths[k])) {
        auto name = loc.name;
        index.entries_[name].push_back(std::move(loc));
      }
    }
  }
  for (const auto& [name, locs] : index.entries_) {
    for (const auto& loc : locs) {
      ++index.stats_.definitions_found;
      if (loc.kind == DefinitionKind::kFunction) {
        ++index.stats_.functions;
      } else {
        ++index.stats_.structures;
      }
    }
  }
  if (options.cache_path && !index.stats_.cache_hit) {
    try {
      text::WriteFile(*options.cache_path, index.CacheJson().dump(1));
    } catch (const Error& e) {
      index.stats_.warnings.push_back(e.what());
    }
  }
  return index;
}

std::span<const DefinitionLocation> SourceIndex::Lookup(
    std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return {};
  return it->second;
}

RetrievedSource SourceIndex::Retrieve(std::string_view name) const {
  RetrievedSource out;
  out.name = std::string(name);
  for (const auto& loc : Lookup(name)) {
    auto fit = files_.find(loc.file);
    if (fit == files_.end()) continue;
    const auto& lines = fit->second.lines;
    if (loc.end_line > static_cast<int>(lines.size())) continue;
    RetrievedDefinition def;
    def.location = loc;
    def.lines.assign(lines.begin() + (loc.start_line - 1),
                     lines.begin() + loc.end_line);
    out.definitions.push_back(std::move(def));
  }
  out.found = !out.definitions.empty();
  out.ambiguous = out.definitions.size() > 1;
  return out;
}

std::map<std::string, RetrievedSource> SourceIndex::Retrieve(
    const std::vector<std::string>& names) const {
  std::map<std::string, RetrievedSource> out;
  for (const auto& n : names) out.emplace(n, Retrieve(n));
  return out;
}

bool SourceIndex::HasFile(std::string_view file) const {
  return files_.find(file) != files_.end();
}

const std::string& SourceIndex::LineText(std::string_view file,
                                         int line) const {
  auto it = files_.find(file);
  if (it == files_.end()) {
    throw Error(ErrorCode::kFileNotInIndex,
                "file not in index: " + std::string(file));
  }
  const auto& lines = it->second.lines;
  if (line < 1 || static_cast<std::size_t>(line) > lines.size()) {
    throw Error(ErrorCode::kOutOfRange,
                std::string(file) + ": no line " + std::to_string(line));
  }
  return lines[static_cast<std::size_t>(line - 1)];
}

nlohmann::json SourceIndex::StatsJson() const {
  return {{"schema", "index-stats.v1"},
          {"root", root_},
          {"files_scanned", stats_.files_scanned},
          {"definitions_found", stats_.definitions_found},
          {"functions", stats_.functions},
          {"structures", stats_.structures},
          {"distinct_names", entries_.size()},
          {"cache_hit", stats_.cache_hit},
          {"warnings", stats_.warnings}};
}

nlohmann::json SourceIndex::CacheJson() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [path, entry] : files_) {
    files.push_back({{"path", path},
                     {"sha256", entry.sha256},
                     {"lines", entry.lines.size()}});
  }
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [name, locs] : entries_) {
    auto& arr = entries[name] = nlohmann::json::array();
    for (const auto& l : locs) arr.push_back(LocationJson(l));
  }
  return {{"schema", "index.v1"},
          {"root", root_},
          {"globs", globs_},
          {"files", std::move(files)},
          {"entries", std::move(entries)}};
}

}  // namespace crashtriage
