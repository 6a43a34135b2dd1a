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

#include "crashtriage/text.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "crashtriage/error.hpp"

namespace crashtriage {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedReport: return "MalformedReport";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kFileNotInIndex: return "FileNotInIndex";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kResponseTruncated: return "ResponseTruncated";
    case ErrorCode::kFormatFailed: return "FormatFailed";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kSpecMismatch: return "SpecMismatch";
    case ErrorCode::kMissingBinding: return "MissingBinding";
    case ErrorCode::kMissingSource: return "MissingSource";
    case ErrorCode::kRetrievalFailed: return "RetrievalFailed";
    case ErrorCode::kVariableUnidentified: return "VariableUnidentified";
    case ErrorCode::kGroundTruthMissing: return "GroundTruthMissing";
    case ErrorCode::kProgramInvalid: return "ProgramInvalid";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

namespace text {

std::string_view Trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitLines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto nl = s.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto at = s.find(sep, pos);
    out.emplace_back(s.substr(pos, at == std::string_view::npos
                                       ? std::string_view::npos
                                       : at - pos));
    if (at == std::string_view::npos) break;
    pos = at + 1;
  }
  return out;
}

std::string NormalizeWhitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool IsIdentifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) {
    return false;
  }
  for (char c : s) {
    if (!IsIdentChar(c)) return false;
  }
  return true;
}

namespace {

bool TokenAt(std::string_view haystack, std::string_view needle,
             std::size_t at) {
  if (IsIdentChar(needle.front()) && at > 0 && IsIdentChar(haystack[at - 1])) {
    return false;
  }
  std::size_t end = at + needle.size();
  if (IsIdentChar(needle.back()) && end < haystack.size() &&
      IsIdentChar(haystack[end])) {
    return false;
  }
  return true;
}

}  // namespace

bool ContainsToken(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  for (auto at = haystack.find(needle); at != std::string_view::npos;
       at = haystack.find(needle, at + 1)) {
    if (TokenAt(haystack, needle, at)) return true;
  }
  return false;
}

bool ContainsCall(std::string_view haystack, std::string_view callee) {
  if (callee.empty()) return false;
  for (auto at = haystack.find(callee); at != std::string_view::npos;
       at = haystack.find(callee, at + 1)) {
    if (!TokenAt(haystack, callee, at)) continue;
    std::size_t k = at + callee.size();
    while (k < haystack.size() &&
           std::isspace(static_cast<unsigned char>(haystack[k]))) {
      ++k;
    }
    if (k < haystack.size() && haystack[k] == '(') return true;
  }
  return false;
}

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::optional<long long> ParseInt(std::string_view s) {
  s = Trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kInternal, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "cannot read " + path);
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + path);
}

}  // namespace text
}  // namespace crashtriage
