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

#include "wtfpad/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <system_error>

#include "wtfpad/error.hpp"

namespace wtfpad {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line_no, std::string_view line) {
  throw Error(ErrorCode::kMalformedLine,
              "line " + std::to_string(line_no) + ": '" + std::string(line) + "'");
}

}  // namespace

Trace::Trace(std::vector<PacketEvent> events, std::string label)
    : events_(std::move(events)), label_(std::move(label)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (!(e.time >= 0.0) || !std::isfinite(e.time)) {
      throw Error(ErrorCode::kNegativeTime, "event " + std::to_string(i));
    }
    if (e.size == 0) {
      throw Error(ErrorCode::kInvalidParams, "zero-size event " + std::to_string(i));
    }
    if (e.kind == PacketKind::kControl && e.direction != Direction::kOutgoing) {
      throw Error(ErrorCode::kInvalidParams,
                  "control packet must be outgoing (event " + std::to_string(i) + ")");
    }
    if (i > 0 && e.time < events_[i - 1].time) {
      throw Error(ErrorCode::kNonMonotonicTime, "event " + std::to_string(i));
    }
  }
}

bool passes(const PacketEvent& e, DirectionFilter filter) noexcept {
  switch (filter) {
    case DirectionFilter::kBoth: return true;
    case DirectionFilter::kOutgoing: return e.direction == Direction::kOutgoing;
    case DirectionFilter::kIncoming: return e.direction == Direction::kIncoming;
  }
  return false;
}

std::vector<PacketEvent> Trace::filtered(DirectionFilter filter) const {
  std::vector<PacketEvent> out;
  out.reserve(events_.size());
  std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
               [filter](const PacketEvent& e) { return passes(e, filter); });
  return out;
}

std::uint64_t Trace::total_bytes() const noexcept {
  std::uint64_t total = 0;
  for (const auto& e : events_) total += e.size;
  return total;
}

Trace parse_trace(std::string_view text, std::string label) {
  std::vector<PacketEvent> events;
  std::size_t line_no = 0;
  double last_time = 0.0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 2 && fields.size() != 3) malformed(line_no, line);

    double time = 0.0;
    {
      const auto f = fields[0];
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), time);
      if (ec != std::errc{} || p != f.data() + f.size() || !std::isfinite(time) ||
          time < 0.0) {
        malformed(line_no, line);
      }
    }
    std::int64_t signed_size = 0;
    {
      auto f = fields[1];
      if (!f.empty() && f.front() == '+') f.remove_prefix(1);
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), signed_size);
      if (ec != std::errc{} || p != f.data() + f.size() || signed_size == 0 ||
          std::llabs(signed_size) > std::numeric_limits<std::uint32_t>::max()) {
        malformed(line_no, line);
      }
    }
    if (!events.empty() && time < last_time) {
      throw Error(ErrorCode::kNonMonotonicTime, "line " + std::to_string(line_no));
    }
    PacketKind kind = PacketKind::kReal;
    if (fields.size() == 3) {
      if (fields[2] == "R") {
        kind = PacketKind::kReal;
      } else if (fields[2] == "D") {
        kind = PacketKind::kDummy;
      } else if (fields[2] == "C" && signed_size > 0) {
        kind = PacketKind::kControl;
      } else {
        malformed(line_no, line);
      }
    }
    last_time = time;
    events.push_back({time,
                      signed_size > 0 ? Direction::kOutgoing : Direction::kIncoming,
                      static_cast<std::uint32_t>(std::llabs(signed_size)), kind});
  }
  if (events.empty()) throw Error(ErrorCode::kEmptyTrace, label);
  return Trace(std::move(events), std::move(label));
}

std::string serialize_trace(const Trace& trace, bool annotate) {
  std::string out;
  out.reserve(trace.size() * 24);
  char buf[64];
  for (const auto& e : trace) {
    const long long signed_size =
        e.direction == Direction::kOutgoing ? static_cast<long long>(e.size)
                                            : -static_cast<long long>(e.size);
    int n = std::snprintf(buf, sizeof(buf), "%.6f\t%+lld", e.time, signed_size);
    out.append(buf, static_cast<std::size_t>(n));
    if (annotate) {
      out += '\t';
      out += e.kind == PacketKind::kReal ? 'R' : e.kind == PacketKind::kDummy ? 'D' : 'C';
    }
    out += '\n';
  }
  return out;
}

std::vector<double> interarrival_times(const Trace& trace, DirectionFilter filter) {
  std::vector<double> times;
  for (const auto& e : trace) {
    if (passes(e, filter)) times.push_back(e.time);
  }
  if (times.size() < 2) {
    throw Error(ErrorCode::kTooFewEvents,
                "need >= 2 events, have " + std::to_string(times.size()));
  }
  std::vector<double> gaps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps[i - 1] = times[i] - times[i - 1];
  return gaps;
}

std::vector<WindowBandwidth> instantaneous_bandwidth(const Trace& trace,
                                                     std::size_t window) {
  if (window < 2) throw Error(ErrorCode::kInvalidParams, "window must be >= 2");
  if (trace.size() < window) {
    throw Error(ErrorCode::kTooFewEvents, "trace shorter than window");
  }
  const auto& ev = trace.events();
  std::vector<WindowBandwidth> out;
  out.reserve(ev.size() - window + 1);
  std::uint64_t bytes = 0;
  for (std::size_t i = 0; i < window; ++i) bytes += ev[i].size;
  for (std::size_t start = 0;; ++start) {
    const double span = ev[start + window - 1].time - ev[start].time;
    const double bw = span > 0.0 ? static_cast<double>(bytes) / span
                                 : std::numeric_limits<double>::infinity();
    out.push_back({start, bw});
    if (start + window >= ev.size()) break;
    bytes += ev[start + window].size;
    bytes -= ev[start].size;
  }
  return out;
}

Trace merge_traces(const Trace& a, const Trace& b, double offset) {
  if (!(offset >= 0.0)) throw Error(ErrorCode::kInvalidParams, "offset must be >= 0");
  std::vector<PacketEvent> shifted(b.begin(), b.end());
  for (auto& e : shifted) e.time += offset;
  std::vector<PacketEvent> merged;
  merged.reserve(a.size() + b.size());
  // std::merge takes from the first range on ties.
  std::merge(a.begin(), a.end(), shifted.begin(), shifted.end(),
             std::back_inserter(merged),
             [](const PacketEvent& x, const PacketEvent& y) { return x.time < y.time; });
  return Trace(std::move(merged), a.label());
}

}  // namespace wtfpad
