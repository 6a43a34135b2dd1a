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

#ifndef CRASHTRIAGE_ERROR_HPP_
#define CRASHTRIAGE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace crashtriage {

// Numeric values are part of the C ABI (see crashtriage.h); append only.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kMalformedReport = 2,
  kEmptyTrace = 3,
  kIoFailure = 4,
  kFileNotInIndex = 5,
  kOutOfRange = 6,
  kBackendUnavailable = 7,
  kResponseTruncated = 8,
  kFormatFailed = 9,
  kSpecInvalid = 10,
  kSpecMismatch = 11,
  kMissingBinding = 12,
  kMissingSource = 13,
  kRetrievalFailed = 14,
  kVariableUnidentified = 15,
  kGroundTruthMissing = 16,
  kProgramInvalid = 17,
  kInternal = 99,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crashtriage

#endif  // CRASHTRIAGE_ERROR_HPP_
