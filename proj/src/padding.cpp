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

#include "wtfpad/padding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "wtfpad/error.hpp"

namespace wtfpad {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::kIdle: return "S";
    case Mode::kBurst: return "B";
    case Mode::kGap: return "G";
  }
  return "?";
}

std::string_view to_string(ActionType type) noexcept {
  switch (type) {
    case ActionType::kSendReal: return "send-real";
    case ActionType::kSendDummy: return "send-dummy";
    case ActionType::kSetTimer: return "set-timer";
    case ActionType::kCancelTimer: return "cancel-timer";
  }
  return "?";
}

PaddingMachine::PaddingMachine(MachineRole role, TokenHistogram burst, TokenHistogram gap)
    : role_(role), burst_(std::move(burst)), gap_(std::move(gap)) {}

void PaddingMachine::set_histograms(TokenHistogram burst, TokenHistogram gap) {
  burst_ = std::move(burst);
  gap_ = std::move(gap);
}

bool PaddingMachine::is_trigger(MachineEventType type) const noexcept {
  if (type == MachineEventType::kStartOfTransmission) return true;
  return role_ == MachineRole::kSend ? type == MachineEventType::kPushReal
                                     : type == MachineEventType::kReceive;
}

bool PaddingMachine::arm(TokenHistogram& h, Mode next, double now, std::mt19937_64& rng,
                         std::vector<MachineAction>& actions) {
  if (h.total_tokens() == 0) h.refill();
  const double delay = h.sample(rng);
  h.consume_token(delay);
  if (std::isinf(delay)) return false;
  mode_ = next;
  pending_ = delay;
  timer_start_ = now;
  actions.push_back({ActionType::kSetTimer, delay});
  return true;
}

void PaddingMachine::enter_burst(double now, bool timer_pending, std::mt19937_64& rng,
                                 std::vector<MachineAction>& actions) {
  if (arm(burst_, Mode::kBurst, now, rng, actions)) return;
  mode_ = Mode::kIdle;
  pending_.reset();
  if (timer_pending) actions.push_back({ActionType::kCancelTimer});
}

std::vector<MachineAction> PaddingMachine::step(const MachineEvent& event,
                                                std::mt19937_64& rng) {
  std::vector<MachineAction> actions;
  const double now = event.time;

  if (event.type == MachineEventType::kEndOfSession) return actions;

  if (event.type == MachineEventType::kTimeoutExpired) {
    if (mode_ == Mode::kIdle || !pending_) {
      throw Error(ErrorCode::kInvalidTransition, "timeout with no pending timer");
    }
    // The expired delay's token was taken when the timer was armed.
    pending_.reset();
    actions.push_back({ActionType::kSendDummy});
    if (!arm(gap_, Mode::kGap, now, rng, actions)) enter_burst(now, false, rng, actions);
    return actions;
  }

  if (!is_trigger(event.type)) {
    throw Error(ErrorCode::kInvalidTransition,
                "event not accepted by a " +
                    std::string(role_ == MachineRole::kSend ? "send" : "receive") + " machine");
  }

  const bool forwards = role_ == MachineRole::kSend && event.type == MachineEventType::kPushReal;
  if (forwards) actions.push_back({ActionType::kSendReal});

  switch (mode_) {
    case Mode::kIdle:
      enter_burst(now, false, rng, actions);
      break;
    case Mode::kBurst:
    case Mode::kGap: {
      TokenHistogram& h = mode_ == Mode::kBurst ? burst_ : gap_;
      const double sampled = *pending_;
      const double elapsed = std::clamp(now - timer_start_, 0.0, sampled);
      h.return_token(sampled, elapsed);
      pending_.reset();
      enter_burst(now, true, rng, actions);
      break;
    }
  }
  return actions;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kSetHistogramsType = 0x01;
constexpr std::uint8_t kStartType = 0x02;
constexpr std::uint32_t kHistogramCount = 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void expect_zero_tail() const {
    for (std::size_t i = pos_; i < bytes_.size(); ++i) {
      if (bytes_[i] != 0) throw Error(ErrorCode::kMalformedControl, "non-zero padding");
    }
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorCode::kMalformedControl, "truncated payload");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_histogram(std::vector<std::uint8_t>& out, const TokenHistogram& h) {
  put_u32(out, static_cast<std::uint32_t>(h.bins()));
  put_f64(out, h.max_delay());
  for (auto k : h.tokens()) put_u32(out, k);
}

TokenHistogram read_histogram(Reader& r) {
  const auto n = r.u32();
  const double m = r.f64();
  if (n < 2 || n > 1000 || !(m > 0.0) || !std::isfinite(m)) {
    throw Error(ErrorCode::kMalformedControl, "bad histogram geometry");
  }
  if (r.remaining() < std::size_t{n} * 4) {
    throw Error(ErrorCode::kMalformedControl, "truncated payload");
  }
  std::vector<std::uint32_t> tokens(n);
  for (auto& k : tokens) k = r.u32();
  return TokenHistogram(n, m, std::move(tokens));
}

}  // namespace

std::vector<std::uint8_t> encode_control(const ControlPayload& payload,
                                         std::uint32_t cell_size) {
  std::vector<std::uint8_t> out;
  if (const auto* set = std::get_if<SetHistograms>(&payload)) {
    out.push_back(kSetHistogramsType);
    put_u32(out, kHistogramCount);
    const auto& h = set->histograms;
    for (const auto* hist : {&h.outgoing_burst, &h.outgoing_gap, &h.incoming_burst,
                             &h.incoming_gap}) {
      put_histogram(out, *hist);
    }
  } else {
    out.push_back(kStartType);
  }
  if (out.size() > cell_size) {
    throw Error(ErrorCode::kPayloadTooLarge, std::to_string(out.size()) + " bytes exceed cell of " +
                                                 std::to_string(cell_size));
  }
  out.resize(cell_size, 0);
  return out;
}

ControlPayload decode_control(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto type = r.u8();
  if (type == kStartType) {
    r.expect_zero_tail();
    return StartOfTransmission{};
  }
  if (type != kSetHistogramsType) throw Error(ErrorCode::kMalformedControl, "unknown type byte");
  if (r.u32() != kHistogramCount) {
    throw Error(ErrorCode::kMalformedControl, "expected 4 histograms");
  }
  auto ob = read_histogram(r);
  auto og = read_histogram(r);
  auto ib = read_histogram(r);
  auto ig = read_histogram(r);
  r.expect_zero_tail();
  return SetHistograms{{std::move(ob), std::move(og), std::move(ib), std::move(ig)}};
}

// ---------------------------------------------------------------------------

namespace {

TokenHistogram pick(const HistogramSet& s, EndpointRole role, MachineRole machine, bool burst) {
  // Client: send <- outgoing, receive <- incoming. Bridge: the reverse.
  const bool outgoing = (role == EndpointRole::kClient) == (machine == MachineRole::kSend);
  if (outgoing) return burst ? s.outgoing_burst : s.outgoing_gap;
  return burst ? s.incoming_burst : s.incoming_gap;
}

}  // namespace

Endpoint::Endpoint(EndpointRole role, const HistogramSet& histograms, EndpointOptions options)
    : role_(role),
      options_(options),
      histograms_(histograms),
      send_(MachineRole::kSend, pick(histograms, role, MachineRole::kSend, true),
            pick(histograms, role, MachineRole::kSend, false)),
      receive_(MachineRole::kReceive, pick(histograms, role, MachineRole::kReceive, true),
               pick(histograms, role, MachineRole::kReceive, false)) {
  if (options_.cell_size == 0) throw Error(ErrorCode::kInvalidParams, "cell size must be > 0");
}

void Endpoint::install(const HistogramSet& set) {
  histograms_ = set;
  send_.set_histograms(pick(set, role_, MachineRole::kSend, true),
                       pick(set, role_, MachineRole::kSend, false));
  receive_.set_histograms(pick(set, role_, MachineRole::kReceive, true),
                          pick(set, role_, MachineRole::kReceive, false));
}

bool Endpoint::quiescent() const noexcept {
  return send_.mode() == Mode::kIdle && receive_.mode() == Mode::kIdle &&
         !send_.pending_delay() && !receive_.pending_delay();
}

void Endpoint::apply(MachineRole r, const std::vector<MachineAction>& actions, double now,
                     std::optional<std::uint32_t> real_size, HandleResult& out) {
  auto& generation = r == MachineRole::kSend ? send_generation_ : receive_generation_;
  for (const auto& a : actions) {
    switch (a.type) {
      case ActionType::kSendReal:
        out.emissions.push_back(
            {{now, outgoing_direction(), real_size.value_or(options_.cell_size), PacketKind::kReal},
             {}});
        break;
      case ActionType::kSendDummy:
        out.emissions.push_back(
            {{now, outgoing_direction(), options_.cell_size, PacketKind::kDummy}, {}});
        ++padding_sent_;
        break;
      case ActionType::kSetTimer:
        out.timers.push_back({r, now + a.delay, ++generation});
        break;
      case ActionType::kCancelTimer:
        ++generation;
        break;
    }
  }
}

HandleResult Endpoint::handle(const EndpointEvent& event, double now, std::mt19937_64& rng) {
  if (now < last_now_) throw Error(ErrorCode::kClockRegression, "event time went backwards");
  last_now_ = now;
  HandleResult out;

  if (const auto* app = std::get_if<AppData>(&event)) {
    if (app->size == 0) throw Error(ErrorCode::kInvalidParams, "empty application data");
    const bool was_idle = send_.mode() == Mode::kIdle;
    const auto actions = send_.step({MachineEventType::kPushReal, now}, rng);
    apply(MachineRole::kSend, actions, now, app->size, out);
    if (role_ == EndpointRole::kClient && options_.signal_start && was_idle &&
        send_.mode() != Mode::kIdle && !session_signalled_) {
      session_signalled_ = true;
      auto emit_control = [&](const ControlPayload& p) {
        out.emissions.push_back({{now, Direction::kOutgoing, options_.cell_size,
                                  PacketKind::kControl},
                                 encode_control(p, options_.cell_size)});
        ++control_sent_;
      };
      if (options_.push_histograms) emit_control(SetHistograms{histograms_});
      emit_control(StartOfTransmission{});
    }
    return out;
  }

  if (const auto* link = std::get_if<LinkPacket>(&event)) {
    auto type = MachineEventType::kReceive;
    if (link->packet.kind == PacketKind::kDummy) ++padding_received_;
    if (link->packet.kind == PacketKind::kControl) {
      ++control_received_;
      const auto payload = decode_control(link->payload);
      if (const auto* set = std::get_if<SetHistograms>(&payload)) {
        if (role_ == EndpointRole::kBridge) install(set->histograms);
      } else {
        type = MachineEventType::kStartOfTransmission;
      }
    }
    const auto actions = receive_.step({type, now}, rng);
    apply(MachineRole::kReceive, actions, now, std::nullopt, out);
    return out;
  }

  const auto& timer = std::get<TimerFired>(event);
  const auto current = timer.machine == MachineRole::kSend ? send_generation_ : receive_generation_;
  if (timer.generation != current || !machine(timer.machine).pending_delay()) return out;
  const auto actions = machine(timer.machine).step({MachineEventType::kTimeoutExpired, now}, rng);
  apply(timer.machine, actions, now, std::nullopt, out);
  return out;
}

void Endpoint::end_session(double now, std::mt19937_64& rng) {
  send_.step({MachineEventType::kEndOfSession, now}, rng);
  receive_.step({MachineEventType::kEndOfSession, now}, rng);
  session_signalled_ = false;
}

}  // namespace wtfpad
