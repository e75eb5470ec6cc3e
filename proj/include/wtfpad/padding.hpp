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
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wtfpad/histogram.hpp"
#include "wtfpad/trace.hpp"

namespace wtfpad {

// ---------------------------------------------------------------------------
// Adaptive padding state machine
// ---------------------------------------------------------------------------

enum class Mode : std::uint8_t { kIdle, kBurst, kGap };  // S, B, G

enum class MachineRole : std::uint8_t {
  kSend,     // triggered by data pushed from the application
  kReceive,  // triggered by packets arriving from the peer
};

enum class MachineEventType : std::uint8_t {
  kPushReal,
  kReceive,
  kTimeoutExpired,
  kStartOfTransmission,
  kEndOfSession,
};

struct MachineEvent {
  MachineEventType type;
  double time = 0.0;
};

enum class ActionType : std::uint8_t { kSendReal, kSendDummy, kSetTimer, kCancelTimer };

struct MachineAction {
  ActionType type;
  double delay = 0.0;  // kSetTimer only

  friend bool operator==(const MachineAction&, const MachineAction&) = default;
};

std::string_view to_string(Mode mode) noexcept;
std::string_view to_string(ActionType type) noexcept;

/// One AP machine with its burst (H_B) and gap (H_G) histograms.
///
/// Transitions, with "trigger" being push-real for a send machine, receive
/// for a receive machine, and start-of-transmission for either:
///   S + trigger : sample H_B; finite -> B, infinity -> stay S
///   B + trigger : return the H_B token for the elapsed time, resample H_B
///   B + timeout : dummy, sample H_G; finite -> G, infinity -> resample H_B
///   G + timeout : dummy, resample H_G; finite -> G, infinity -> resample H_B
///   G + trigger : return the H_G token, resample H_B
/// Resampling H_B and drawing infinity ends in S. The send machine forwards
/// real data immediately in every mode. A finite sample's token is taken
/// when its timer is armed, so a preempted timer hands it back through
/// return_token.
class PaddingMachine {
 public:
  PaddingMachine(MachineRole role, TokenHistogram burst, TokenHistogram gap);

  MachineRole role() const noexcept { return role_; }
  Mode mode() const noexcept { return mode_; }
  /// Sampled delay of the armed timer, if any.
  std::optional<double> pending_delay() const noexcept { return pending_; }
  double timer_start() const noexcept { return timer_start_; }

  const TokenHistogram& burst_histogram() const noexcept { return burst_; }
  const TokenHistogram& gap_histogram() const noexcept { return gap_; }
  void set_histograms(TokenHistogram burst, TokenHistogram gap);

  std::vector<MachineAction> step(const MachineEvent& event, std::mt19937_64& rng);

 private:
  bool is_trigger(MachineEventType type) const noexcept;
  bool arm(TokenHistogram& h, Mode next, double now, std::mt19937_64& rng,
           std::vector<MachineAction>& actions);
  void enter_burst(double now, bool timer_pending, std::mt19937_64& rng,
                   std::vector<MachineAction>& actions);

  MachineRole role_;
  Mode mode_ = Mode::kIdle;
  std::optional<double> pending_;
  double timer_start_ = 0.0;
  TokenHistogram burst_;
  TokenHistogram gap_;
};

// ---------------------------------------------------------------------------
// Control messages
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kDefaultCellSize = 1500;

struct StartOfTransmission {
  friend bool operator==(const StartOfTransmission&, const StartOfTransmission&) = default;
};

struct SetHistograms {
  HistogramSet histograms;
  friend bool operator==(const SetHistograms&, const SetHistograms&) = default;
};

using ControlPayload = std::variant<SetHistograms, StartOfTransmission>;

/// Wire format: type byte (0x01 set-histograms, 0x02 start). Set-histograms
/// continues with a u32 count (4) and per histogram u32 n, f64 M and n u32
/// token counts, all little-endian. The payload is zero-padded to one cell.
/// Only current token counts travel; the decoded snapshot equals them.
std::vector<std::uint8_t> encode_control(const ControlPayload& payload,
                                         std::uint32_t cell_size = kDefaultCellSize);
ControlPayload decode_control(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Endpoint: a send machine and a receive machine at the client or bridge
// ---------------------------------------------------------------------------

enum class EndpointRole : std::uint8_t { kClient, kBridge };

struct EndpointOptions {
  std::uint32_t cell_size = kDefaultCellSize;
  /// Client only: flag the bridge when the send machine first leaves S.
  bool signal_start = true;
  /// Client only: ship the histogram set ahead of the start flag.
  bool push_histograms = false;
};

struct AppData {
  std::uint32_t size = kDefaultCellSize;
};

struct LinkPacket {
  PacketEvent packet;
  std::vector<std::uint8_t> payload;  // control packets only
};

struct TimerFired {
  MachineRole machine;
  std::uint64_t generation;
};

using EndpointEvent = std::variant<AppData, LinkPacket, TimerFired>;

struct Emission {
  PacketEvent packet;
  std::vector<std::uint8_t> payload;
};

/// A timer the owner must deliver back as TimerFired at `deadline`. A later
/// request or cancel for the same machine bumps the generation, so stale
/// deliveries are ignored.
struct TimerRequest {
  MachineRole machine;
  double deadline;
  std::uint64_t generation;
};

struct HandleResult {
  std::vector<Emission> emissions;
  std::vector<TimerRequest> timers;
};

class Endpoint {
 public:
  /// `histograms` is always given from the client's point of view; a bridge
  /// drives its send machine with the incoming pair.
  Endpoint(EndpointRole role, const HistogramSet& histograms, EndpointOptions options = {});

  EndpointRole role() const noexcept { return role_; }
  Direction outgoing_direction() const noexcept {
    return role_ == EndpointRole::kClient ? Direction::kOutgoing : Direction::kIncoming;
  }
  const EndpointOptions& options() const noexcept { return options_; }
  const HistogramSet& histograms() const noexcept { return histograms_; }

  const PaddingMachine& send_machine() const noexcept { return send_; }
  const PaddingMachine& receive_machine() const noexcept { return receive_; }

  std::uint64_t padding_sent() const noexcept { return padding_sent_; }
  std::uint64_t padding_received() const noexcept { return padding_received_; }
  std::uint64_t control_sent() const noexcept { return control_sent_; }
  std::uint64_t control_received() const noexcept { return control_received_; }

  /// Both machines idle and no timer armed.
  bool quiescent() const noexcept;

  HandleResult handle(const EndpointEvent& event, double now, std::mt19937_64& rng);

  /// Marks the end of a page load; the next one signals start again.
  void end_session(double now, std::mt19937_64& rng);

 private:
  PaddingMachine& machine(MachineRole r) { return r == MachineRole::kSend ? send_ : receive_; }
  void apply(MachineRole r, const std::vector<MachineAction>& actions, double now,
             std::optional<std::uint32_t> real_size, HandleResult& out);
  void install(const HistogramSet& set);

  EndpointRole role_;
  EndpointOptions options_;
  HistogramSet histograms_;
  PaddingMachine send_;
  PaddingMachine receive_;
  std::uint64_t send_generation_ = 0;
  std::uint64_t receive_generation_ = 0;
  bool session_signalled_ = false;
  double last_now_ = -std::numeric_limits<double>::infinity();
  std::uint64_t padding_sent_ = 0;
  std::uint64_t padding_received_ = 0;
  std::uint64_t control_sent_ = 0;
  std::uint64_t control_received_ = 0;
};

}  // namespace wtfpad
