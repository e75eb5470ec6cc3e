/*
 * Copyright 2026 The wtfpad Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wtfpad {

enum class ErrorCode {
  kMalformedLine,
  kNonMonotonicTime,
  kEmptyTrace,
  kTooFewEvents,
  kInvalidParams,
  kNegativeTime,
  kEmptySamples,
  kInvalidProbability,
  kInvalidMeanLength,
  kEmptyHistogram,
  kZeroDuration,
  kNoBursts,
  kTooFewSamples,
  kNonPositiveSample,
  kDegenerateScale,
  kInvalidPercentile,
  kInvalidTransition,
  kClockRegression,
  kPayloadTooLarge,
  kMalformedControl,
  kSimulationCapExceeded,
  kMissingRealEvents,
  kInvalidK,
  kInsufficientInstances,
  kInsufficientBackground,
  kNoPositives,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure in the library surfaces as this exception; code() identifies
// the failure class, what() carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wtfpad
