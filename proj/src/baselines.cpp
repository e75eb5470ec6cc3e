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

#include "wtfpad/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "wtfpad/error.hpp"

namespace wtfpad {

namespace {

/// Slots of one direction: whether slot k carries real bytes.
struct SlotSchedule {
  std::vector<bool> real;       // per slot, up to the last real-carrying slot
  std::size_t data_slots = 0;   // slots needed to drain all real bytes
};

/// FIFO byte queue drained one cell per slot at t0 + k * rho.
SlotSchedule schedule(const std::vector<PacketEvent>& events, double t0, double rho,
                      std::uint32_t cell) {
  SlotSchedule s;
  std::size_t next = 0;
  std::uint64_t queued = 0;
  for (std::size_t k = 0; next < events.size() || queued > 0; ++k) {
    const double slot = t0 + static_cast<double>(k) * rho;
    while (next < events.size() && events[next].time <= slot) queued += events[next++].size;
    if (queued > 0) {
      queued -= std::min<std::uint64_t>(queued, cell);
      s.real.push_back(true);
      s.data_slots = k + 1;
    } else {
      s.real.push_back(false);
    }
  }
  s.real.resize(s.data_slots);
  return s;
}

void emit(std::vector<PacketEvent>& out, const SlotSchedule& s, std::size_t slots, double t0,
          double rho, Direction dir, std::uint32_t cell) {
  for (std::size_t k = 0; k < slots; ++k) {
    const bool real = k < s.real.size() && s.real[k];
    out.push_back({t0 + static_cast<double>(k) * rho, dir, cell,
                   real ? PacketKind::kReal : PacketKind::kDummy});
  }
}

Trace finish(std::vector<PacketEvent> out, const std::string& label) {
  std::stable_sort(out.begin(), out.end(),
                   [](const PacketEvent& a, const PacketEvent& b) { return a.time < b.time; });
  return Trace(std::move(out), label);
}

void require_raw(const Trace& trace) {
  if (trace.empty()) throw Error(ErrorCode::kEmptyTrace, trace.label());
  for (const auto& e : trace) {
    if (e.kind != PacketKind::kReal) {
      throw Error(ErrorCode::kInvalidParams, "baselines expect a raw (all-real) trace");
    }
  }
}

}  // namespace

Trace buflo(const Trace& trace, const BufloParams& p) {
  if (!(p.tau > 0.0) || !(p.rho > 0.0) || p.cell_size == 0) {
    throw Error(ErrorCode::kInvalidParams, "BuFLO parameters must be positive");
  }
  require_raw(trace);
  const double t0 = trace[0].time;
  const auto out_s = schedule(trace.filtered(DirectionFilter::kOutgoing), t0, p.rho, p.cell_size);
  const auto in_s = schedule(trace.filtered(DirectionFilter::kIncoming), t0, p.rho, p.cell_size);
  // Smallest slot count whose span reaches tau; both directions share it.
  const auto min_slots = static_cast<std::size_t>(std::ceil(p.tau / p.rho - 1e-9)) + 1;
  const std::size_t slots = std::max({min_slots, out_s.data_slots, in_s.data_slots});
  std::vector<PacketEvent> out;
  out.reserve(2 * slots);
  emit(out, out_s, slots, t0, p.rho, Direction::kOutgoing, p.cell_size);
  emit(out, in_s, slots, t0, p.rho, Direction::kIncoming, p.cell_size);
  return finish(std::move(out), trace.label());
}

Trace tamaraw(const Trace& trace, const TamarawParams& p) {
  if (!(p.rho_out > 0.0) || !(p.rho_in > 0.0) || p.cell_size == 0 || p.pad_multiple < 1) {
    throw Error(ErrorCode::kInvalidParams, "Tamaraw parameters must be positive, L >= 1");
  }
  require_raw(trace);
  const double t0 = trace[0].time;
  std::vector<PacketEvent> out;
  for (const auto dir : {Direction::kOutgoing, Direction::kIncoming}) {
    const double rho = dir == Direction::kOutgoing ? p.rho_out : p.rho_in;
    const auto s = schedule(trace.filtered(dir == Direction::kOutgoing ? DirectionFilter::kOutgoing
                                                                       : DirectionFilter::kIncoming),
                            t0, rho, p.cell_size);
    const std::size_t l = p.pad_multiple;
    const std::size_t slots = (s.data_slots + l - 1) / l * l;
    emit(out, s, slots, t0, rho, dir, p.cell_size);
  }
  return finish(std::move(out), trace.label());
}

}  // namespace wtfpad
