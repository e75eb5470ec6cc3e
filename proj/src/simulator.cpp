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

#include "wtfpad/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <tuple>
#include <variant>

#include "wtfpad/error.hpp"
#include "wtfpad/parallel.hpp"

namespace wtfpad {

namespace {

enum class Side : std::uint8_t { kClient, kBridge };

struct AppInject {
  Side side;
  std::uint32_t size;
  std::size_t original_index;
  double observed_at;  // recorded timestamp of the original event
};

struct Delivery {
  Side to;
  LinkPacket packet;
};

struct TimerDue {
  Side side;
  TimerFired timer;
};

struct Scheduled {
  double time;
  std::uint64_t seq;
  std::variant<AppInject, Delivery, TimerDue> what;
};

struct Later {
  bool operator()(const Scheduled& a, const Scheduled& b) const {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
};

struct Observed {
  double time;
  int rank;  // 0 for real packets, ordered by original index; 1 otherwise
  std::uint64_t key;
  PacketEvent packet;
};

}  // namespace

Trace simulate(const Trace& trace, Endpoint& client, Endpoint& bridge, const LinkModel& link,
               std::uint64_t seed, std::size_t max_timer_events) {
  if (!(link.one_way_delay >= 0.0) || !std::isfinite(link.one_way_delay)) {
    throw Error(ErrorCode::kInvalidParams, "one-way delay must be finite and >= 0");
  }
  if (client.role() != EndpointRole::kClient || bridge.role() != EndpointRole::kBridge) {
    throw Error(ErrorCode::kInvalidParams, "endpoint roles must be client and bridge");
  }
  const double delay = link.one_way_delay;
  std::mt19937_64 rng(seed);
  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> queue;
  std::uint64_t seq = 0;

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace[i];
    if (e.kind != PacketKind::kReal) {
      throw Error(ErrorCode::kInvalidParams, "simulate expects a raw (all-real) trace");
    }
    if (e.direction == Direction::kOutgoing) {
      queue.push({e.time, seq++, AppInject{Side::kClient, e.size, i, e.time}});
    } else {
      queue.push({e.time - delay, seq++, AppInject{Side::kBridge, e.size, i, e.time}});
    }
  }

  std::vector<Observed> observed;
  observed.reserve(trace.size() * 2);
  std::size_t timer_events = 0;

  auto route = [&](Side from, HandleResult&& result, double now,
                   std::optional<std::pair<std::size_t, double>> original) {
    for (auto& em : result.emissions) {
      const bool real = em.packet.kind == PacketKind::kReal;
      double at_client = from == Side::kClient ? now : now + delay;
      Observed obs{at_client, 1, seq, em.packet};
      if (real && original) {
        at_client = original->second;
        obs = {at_client, 0, original->first, em.packet};
      }
      obs.packet.time = at_client;
      observed.push_back(obs);
      const Side to = from == Side::kClient ? Side::kBridge : Side::kClient;
      const double arrive = from == Side::kClient ? now + delay : at_client;
      em.packet.time = arrive;
      queue.push({arrive, seq++, Delivery{to, LinkPacket{em.packet, std::move(em.payload)}}});
    }
    for (const auto& t : result.timers) {
      queue.push({t.deadline, seq++, TimerDue{from, TimerFired{t.machine, t.generation}}});
    }
  };
  auto endpoint = [&](Side s) -> Endpoint& { return s == Side::kClient ? client : bridge; };

  while (!queue.empty()) {
    Scheduled ev = queue.top();
    queue.pop();
    if (auto* app = std::get_if<AppInject>(&ev.what)) {
      auto result = endpoint(app->side).handle(AppData{app->size}, ev.time, rng);
      route(app->side, std::move(result), ev.time,
            std::make_pair(app->original_index, app->observed_at));
    } else if (auto* d = std::get_if<Delivery>(&ev.what)) {
      auto result = endpoint(d->to).handle(d->packet, ev.time, rng);
      route(d->to, std::move(result), ev.time, std::nullopt);
    } else {
      auto& t = std::get<TimerDue>(ev.what);
      if (++timer_events > max_timer_events) {
        throw Error(ErrorCode::kSimulationCapExceeded,
                    "more than " + std::to_string(max_timer_events) + " timer events");
      }
      auto result = endpoint(t.side).handle(t.timer, ev.time, rng);
      route(t.side, std::move(result), ev.time, std::nullopt);
    }
  }
  const double end = trace.empty() ? 0.0 : trace.events().back().time;
  client.end_session(end, rng);
  bridge.end_session(end, rng);

  std::sort(observed.begin(), observed.end(), [](const Observed& a, const Observed& b) {
    return std::tie(a.time, a.rank, a.key) < std::tie(b.time, b.rank, b.key);
  });
  std::vector<PacketEvent> events;
  events.reserve(observed.size());
  for (const auto& o : observed) events.push_back(o.packet);
  return Trace(std::move(events), trace.label());
}

Trace simulate(const Trace& trace, const HistogramSet& histograms,
               const SimulationOptions& options, std::uint64_t seed) {
  Endpoint client(EndpointRole::kClient, histograms, options.endpoint);
  Endpoint bridge(EndpointRole::kBridge, histograms, options.endpoint);
  return simulate(trace, client, bridge, options.link, seed, options.max_timer_events);
}

std::vector<Trace> simulate_corpus(const Corpus& corpus, const HistogramSet& histograms,
                                   const SimulationOptions& options, std::uint64_t base_seed) {
  std::vector<Trace> out(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    out[i] = simulate(corpus[i], histograms, options, base_seed ^ static_cast<std::uint64_t>(i));
  });
  return out;
}

namespace {

double last_real_time(const Trace& t) {
  for (auto it = t.events().rbegin(); it != t.events().rend(); ++it) {
    if (it->kind == PacketKind::kReal) return it->time;
  }
  throw Error(ErrorCode::kMissingRealEvents, "trace has no real packets");
}

double relative(double now, double before) {
  if (before > 0.0) return (now - before) / before;
  return now == before ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

OverheadReport overheads(const Trace& original, const Trace& padded, RealEventCheck check) {
  if (original.empty() || padded.empty()) {
    throw Error(ErrorCode::kEmptyTrace, "overheads need non-empty traces");
  }
  if (check == RealEventCheck::kExact) {
    std::size_t j = 0;
    for (const auto& p : padded) {
      if (p.kind != PacketKind::kReal) continue;
      if (j >= original.size() || p.time != original[j].time ||
          p.direction != original[j].direction || p.size != original[j].size) {
        throw Error(ErrorCode::kMissingRealEvents,
                    "real packet " + std::to_string(j) + " altered or missing");
      }
      ++j;
    }
    if (j != original.size()) {
      throw Error(ErrorCode::kMissingRealEvents, std::to_string(original.size() - j) +
                                                     " real packets missing");
    }
  } else {
    std::array<std::uint64_t, 2> need{}, have{};
    for (const auto& e : original) need[static_cast<int>(e.direction)] += e.size;
    for (const auto& e : padded) {
      if (e.kind == PacketKind::kReal) have[static_cast<int>(e.direction)] += e.size;
    }
    if (have[0] < need[0] || have[1] < need[1]) {
      throw Error(ErrorCode::kMissingRealEvents, "padded trace carries fewer real bytes");
    }
  }
  OverheadReport r;
  const double before = static_cast<double>(original.total_bytes());
  r.bandwidth_overhead = (static_cast<double>(padded.total_bytes()) - before) / before;
  r.latency_overhead = relative(last_real_time(padded), last_real_time(original));
  for (const auto& e : padded) {
    if (e.kind == PacketKind::kDummy) ++r.dummy_count;
    if (e.kind == PacketKind::kControl) ++r.control_count;
  }
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptySamples, "median of nothing");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::kEmptySamples, "mean of nothing");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace wtfpad
