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

#include <string>
#include <vector>

namespace wtfpad::cli {

/// Runs the command line (args excludes the program name). Returns the exit
/// status; diagnostics go to stderr as a single line.
int run(const std::vector<std::string>& args);

/// The percentile grid used by `sweep`, weakest protection first.
const std::vector<double>& sweep_percentiles();

}  // namespace wtfpad::cli
