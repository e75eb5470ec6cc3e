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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wtfpad {

/// Direction relative to the client: outgoing flows client to bridge.
enum class Direction : std::uint8_t { kOutgoing, kIncoming };

enum class PacketKind : std::uint8_t { kReal, kDummy, kControl };

enum class DirectionFilter : std::uint8_t { kBoth, kOutgoing, kIncoming };

constexpr Direction opposite(Direction d) noexcept {
  return d == Direction::kOutgoing ? Direction::kIncoming : Direction::kOutgoing;
}

struct PacketEvent {
  double time = 0.0;  // seconds
  Direction direction = Direction::kOutgoing;
  std::uint32_t size = 0;  // bytes
  PacketKind kind = PacketKind::kReal;

  friend bool operator==(const PacketEvent&, const PacketEvent&) = default;
};

/// An ordered packet sequence for one page load.
///
/// Construction validates every event (size > 0, time >= 0, control packets
/// are outgoing) and that times are non-decreasing; ties are allowed.
class Trace {
 public:
  Trace() = default;
  Trace(std::vector<PacketEvent> events, std::string label);

  const std::vector<PacketEvent>& events() const noexcept { return events_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }
  const PacketEvent& operator[](std::size_t i) const { return events_[i]; }

  auto begin() const noexcept { return events_.begin(); }
  auto end() const noexcept { return events_.end(); }

  /// Events passing the filter, in order.
  std::vector<PacketEvent> filtered(DirectionFilter filter) const;

  /// Sum of packet sizes.
  std::uint64_t total_bytes() const noexcept;

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<PacketEvent> events_;
  std::string label_;
};

bool passes(const PacketEvent& e, DirectionFilter filter) noexcept;

/// Parses `<timestamp>\t<signed-size>` lines. Positive sizes are outgoing.
/// Without the optional third `R|D|C` column every event is real.
Trace parse_trace(std::string_view text, std::string label);

/// Writes `%.6f\t%+d` lines; with `annotate` a third `R|D|C` column is added.
std::string serialize_trace(const Trace& trace, bool annotate = false);

std::vector<double> interarrival_times(const Trace& trace,
                                       DirectionFilter filter = DirectionFilter::kBoth);

struct WindowBandwidth {
  std::size_t gap_index;   // index of the window's first inter-arrival gap
  double bytes_per_second; // +inf when the window spans zero time
};

/// Sliding-window bandwidth over `window` consecutive events.
std::vector<WindowBandwidth> instantaneous_bandwidth(const Trace& trace,
                                                     std::size_t window);

/// Interleaves `b`, shifted by `offset`, into `a`. `a` wins ties and keeps
/// its label.
Trace merge_traces(const Trace& a, const Trace& b, double offset);

}  // namespace wtfpad
