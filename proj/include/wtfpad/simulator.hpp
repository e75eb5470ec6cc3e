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
#include <vector>

#include "wtfpad/corpus.hpp"
#include "wtfpad/padding.hpp"
#include "wtfpad/trace.hpp"

namespace wtfpad {

struct LinkModel {
  double one_way_delay = 0.0;  // seconds
};

struct SimulationOptions {
  LinkModel link;
  EndpointOptions endpoint;
  std::size_t max_timer_events = 1'000'000;
};

/// Replays a raw trace through a client and a bridge endpoint and returns
/// every packet crossing the link, timestamped where the client meets it.
///
/// Outgoing events enter as client application data at their recorded
/// times; incoming events enter the bridge one link delay earlier so they
/// reach the client at their recorded times. Real packets keep their exact
/// timestamps and sizes. The run continues until both endpoints fall idle.
Trace simulate(const Trace& trace, Endpoint& client, Endpoint& bridge, const LinkModel& link,
               std::uint64_t seed, std::size_t max_timer_events = 1'000'000);

/// Fresh client/bridge pair per call.
Trace simulate(const Trace& trace, const HistogramSet& histograms,
               const SimulationOptions& options, std::uint64_t seed);

/// Per-trace seeds are base_seed XOR index; output order follows the corpus.
std::vector<Trace> simulate_corpus(const Corpus& corpus, const HistogramSet& histograms,
                                   const SimulationOptions& options, std::uint64_t base_seed);

struct OverheadReport {
  double bandwidth_overhead = 0.0;
  double latency_overhead = 0.0;
  std::uint64_t dummy_count = 0;
  std::uint64_t control_count = 0;
};

enum class RealEventCheck : std::uint8_t {
  kExact,         // every original real event present unchanged (zero-delay defenses)
  kByteCapacity,  // real cells carry at least the original bytes per direction
};

OverheadReport overheads(const Trace& original, const Trace& padded,
                         RealEventCheck check = RealEventCheck::kExact);

double median(std::vector<double> values);
double mean(const std::vector<double>& values);

}  // namespace wtfpad
