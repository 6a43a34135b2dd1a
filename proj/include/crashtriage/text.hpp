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

// Small string helpers shared by the parsers and the verifier.

#ifndef CRASHTRIAGE_TEXT_HPP_
#define CRASHTRIAGE_TEXT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crashtriage::text {

std::string_view Trim(std::string_view s);

// Splits on '\n' only. A trailing newline does not produce an empty line.
std::vector<std::string> SplitLines(std::string_view s);

std::vector<std::string> Split(std::string_view s, char sep);

// Collapses every run of whitespace to one space and trims both ends.
std::string NormalizeWhitespace(std::string_view s);

bool IsIdentChar(char c);
bool IsIdentifier(std::string_view s);

// True when `needle` occurs in `haystack` and is not glued to neighbouring
// identifier characters at either end ("bh" matches "f(bh)" but not "bhx").
bool ContainsToken(std::string_view haystack, std::string_view needle);

// True when `haystack` contains a call of `callee`: the identifier `callee`
// as a whole token followed by optional whitespace and '('.
bool ContainsCall(std::string_view haystack, std::string_view callee);

bool StartsWith(std::string_view s, std::string_view prefix);

std::optional<long long> ParseInt(std::string_view s);

std::string Sha256Hex(std::string_view data);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace crashtriage::text

#endif  // CRASHTRIAGE_TEXT_HPP_
