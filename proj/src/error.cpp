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

#include "wtfpad/error.hpp"

namespace wtfpad {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kNonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kTooFewEvents: return "TooFewEvents";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNegativeTime: return "NegativeTime";
    case ErrorCode::kEmptySamples: return "EmptySamples";
    case ErrorCode::kInvalidProbability: return "InvalidProbability";
    case ErrorCode::kInvalidMeanLength: return "InvalidMeanLength";
    case ErrorCode::kEmptyHistogram: return "EmptyHistogram";
    case ErrorCode::kZeroDuration: return "ZeroDuration";
    case ErrorCode::kNoBursts: return "NoBursts";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kNonPositiveSample: return "NonPositiveSample";
    case ErrorCode::kDegenerateScale: return "DegenerateScale";
    case ErrorCode::kInvalidPercentile: return "InvalidPercentile";
    case ErrorCode::kInvalidTransition: return "InvalidTransition";
    case ErrorCode::kClockRegression: return "ClockRegression";
    case ErrorCode::kPayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::kMalformedControl: return "MalformedControl";
    case ErrorCode::kSimulationCapExceeded: return "SimulationCapExceeded";
    case ErrorCode::kMissingRealEvents: return "MissingRealEvents";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kInsufficientInstances: return "InsufficientInstances";
    case ErrorCode::kInsufficientBackground: return "InsufficientBackground";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace wtfpad
