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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wtfpad/trace.hpp"

namespace wtfpad {

/// A non-empty collection of non-empty traces plus provenance strings.
class Corpus {
 public:
  Corpus(std::vector<Trace> traces, std::map<std::string, std::string> metadata = {});

  const std::vector<Trace>& traces() const noexcept { return traces_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
  std::size_t size() const noexcept { return traces_.size(); }
  const Trace& operator[](std::size_t i) const { return traces_[i]; }
  auto begin() const noexcept { return traces_.begin(); }
  auto end() const noexcept { return traces_.end(); }

  /// Distinct labels in first-appearance order.
  std::vector<std::string> labels() const;

 private:
  std::vector<Trace> traces_;
  std::map<std::string, std::string> metadata_;
};

/// Knobs of the synthetic page-load generator. Each page gets a latent
/// request/response burst signature; instances jitter it.
struct SynthParams {
  std::uint32_t cell_size = 1500;
  int min_bursts = 20;
  int max_bursts = 60;
  double min_response_cells = 2.0;    // page-level median response length range
  double max_response_cells = 80.0;
  double response_spread = 0.8;       // log-sd of per-burst length around the page median
  int max_request_cells = 3;
  double min_gap = 0.03;              // page-level median inter-burst gap range (s)
  double max_gap = 0.6;
  double gap_spread = 0.6;            // log-sd of per-burst gap around the page median
  double server_delay = 0.04;         // median request-to-response delay (s)
  double incoming_iat = 0.002;        // median intra-burst spacing (s)
  double outgoing_iat = 0.006;
  double iat_spread = 0.5;            // log-sd of intra-burst spacing
  double instance_length_jitter = 0.12;  // per-instance log-sd of burst lengths
  double instance_gap_jitter = 0.25;     // per-instance log-sd of gaps
};

/// Deterministic for a fixed seed. Labels are `page000`, `page001`, ...
Corpus synth_corpus(std::size_t pages, std::size_t instances, const SynthParams& params,
                    std::uint64_t seed);

/// Splits `<label>-<instance>.trace` at the last dash.
struct TraceFileName {
  std::string label;
  std::size_t instance;
};
TraceFileName parse_trace_file_name(const std::string& filename);

/// Loads every `*.trace` file in `dir`, ordered by (label, instance).
Corpus load_corpus(const std::filesystem::path& dir);

/// Writes one file per trace; the instance number is the trace's rank
/// among traces sharing its label.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir, bool annotate = false);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace wtfpad
