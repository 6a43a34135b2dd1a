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

// Lexical index over a source snapshot.
//
// The scanner blanks out comments, literals and preprocessor lines, then
// tracks brace depth. A '{' at depth 0 opens a definition when the text
// before it looks like `<type tokens> name(params)` (function) or
// `struct|union name` (structure). Preprocessor conditionals are not
// evaluated, so both arms of an #ifdef are indexed. Functions produced by
// macro expansion are not visible to the scanner and are never reported.

#ifndef CRASHTRIAGE_RETRIEVAL_HPP_
#define CRASHTRIAGE_RETRIEVAL_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace crashtriage {

enum class DefinitionKind { kFunction, kStructure };

std::string_view DefinitionKindName(DefinitionKind kind);

struct DefinitionLocation {
  std::string name;
  DefinitionKind kind = DefinitionKind::kFunction;
  std::string file;  // relative to the index root, '/' separated
  int start_line = 0;
  int end_line = 0;
  std::string signature;  // full text of start_line

  bool operator==(const DefinitionLocation&) const = default;
};

using DefinitionMap =
    std::map<std::string, std::vector<DefinitionLocation>, std::less<>>;

struct IndexStats {
  std::size_t files_scanned = 0;
  std::size_t definitions_found = 0;
  std::size_t functions = 0;
  std::size_t structures = 0;
  bool cache_hit = false;
  std::vector<std::string> warnings;
};

struct RetrievedDefinition {
  DefinitionLocation location;
  std::vector<std::string> lines;  // verbatim, start_line..end_line

  // Text of an absolute line number if this definition spans it.
  std::optional<std::string_view> LineAt(int line) const;
};

struct RetrievedSource {
  std::string name;
  bool found = false;
  bool ambiguous = false;  // more than one definition
  std::vector<RetrievedDefinition> definitions;

  // One "<file>:<line>: <text>" row per source line, all definitions in
  // index order. Empty when not found.
  std::string AnnotatedText() const;
};

struct IndexOptions {
  std::vector<std::string> file_globs = DefaultGlobs();
  // When set, a valid index.v1 cache at this path is reused and a fresh one
  // is written after a rebuild.
  std::optional<std::string> cache_path;
  unsigned threads = 0;  // 0 = hardware concurrency

  static std::vector<std::string> DefaultGlobs();
};

// Scans one translation unit. Exposed for tests.
std::vector<DefinitionLocation> ScanDefinitions(std::string_view source,
                                                const std::string& file);

class SourceIndex {
 public:
  // Throws Error{kIoFailure} when `root` is not a readable directory.
  // Unreadable files become warnings in stats().
  static SourceIndex Build(const std::string& root,
                           const IndexOptions& options = {});

  const std::string& root() const { return root_; }
  const DefinitionMap& entries() const { return entries_; }
  const IndexStats& stats() const { return stats_; }

  std::span<const DefinitionLocation> Lookup(std::string_view name) const;

  RetrievedSource Retrieve(std::string_view name) const;
  std::map<std::string, RetrievedSource> Retrieve(
      const std::vector<std::string>& names) const;

  bool HasFile(std::string_view file) const;
  // Throws Error{kFileNotInIndex} or Error{kOutOfRange}.
  const std::string& LineText(std::string_view file, int line) const;

  nlohmann::json StatsJson() const;
  nlohmann::json CacheJson() const;

 private:
  struct FileEntry {
    std::vector<std::string> lines;
    std::string sha256;
  };

  std::string root_;
  std::vector<std::string> globs_;
  std::map<std::string, FileEntry, std::less<>> files_;
  DefinitionMap entries_;
  IndexStats stats_;
};

}  // namespace crashtriage

#endif  // CRASHTRIAGE_RETRIEVAL_HPP_
