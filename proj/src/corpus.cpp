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

#include "wtfpad/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "wtfpad/error.hpp"

namespace wtfpad {

namespace fs = std::filesystem;

Corpus::Corpus(std::vector<Trace> traces, std::map<std::string, std::string> metadata)
    : traces_(std::move(traces)), metadata_(std::move(metadata)) {
  if (traces_.empty()) throw Error(ErrorCode::kInvalidParams, "corpus is empty");
  for (const auto& t : traces_) {
    if (t.empty()) throw Error(ErrorCode::kEmptyTrace, "corpus trace '" + t.label() + "'");
  }
}

std::vector<std::string> Corpus::labels() const {
  std::vector<std::string> out;
  for (const auto& t : traces_) {
    if (std::find(out.begin(), out.end(), t.label()) == out.end()) out.push_back(t.label());
  }
  return out;
}

namespace {

struct BurstTemplate {
  int request_cells;
  double response_cells;
  double gap_before;  // seconds of silence before the request
};

struct PageTemplate {
  std::vector<BurstTemplate> bursts;
};

PageTemplate make_page(const SynthParams& p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> burst_count(p.min_bursts, p.max_bursts);
  std::uniform_real_distribution<double> log_resp(std::log(p.min_response_cells),
                                                  std::log(p.max_response_cells));
  std::uniform_real_distribution<double> log_gap(std::log(p.min_gap), std::log(p.max_gap));
  std::uniform_int_distribution<int> request(1, p.max_request_cells);
  std::normal_distribution<double> unit;

  const int bursts = burst_count(rng);
  const double resp_median = std::exp(log_resp(rng));
  const double gap_median = std::exp(log_gap(rng));
  PageTemplate page;
  for (int j = 0; j < bursts; ++j) {
    BurstTemplate b;
    b.request_cells = request(rng);
    b.response_cells = std::max(1.0, resp_median * std::exp(p.response_spread * unit(rng)));
    b.gap_before = j == 0 ? 0.0 : gap_median * std::exp(p.gap_spread * unit(rng));
    page.bursts.push_back(b);
  }
  return page;
}

Trace make_instance(const PageTemplate& page, const SynthParams& p, const std::string& label,
                    std::mt19937_64& rng) {
  std::normal_distribution<double> unit;
  auto spacing = [&](double median) { return median * std::exp(p.iat_spread * unit(rng)); };
  std::vector<PacketEvent> events;
  double t = 0.0;
  for (const auto& b : page.bursts) {
    t += b.gap_before * std::exp(p.instance_gap_jitter * unit(rng));
    for (int i = 0; i < b.request_cells; ++i) {
      if (i > 0) t += spacing(p.outgoing_iat);
      events.push_back({t, Direction::kOutgoing, p.cell_size, PacketKind::kReal});
    }
    t += spacing(p.server_delay);
    const auto cells = std::max<long>(
        1, std::lround(b.response_cells * std::exp(p.instance_length_jitter * unit(rng))));
    for (long i = 0; i < cells; ++i) {
      if (i > 0) t += spacing(p.incoming_iat);
      events.push_back({t, Direction::kIncoming, p.cell_size, PacketKind::kReal});
    }
  }
  return Trace(std::move(events), label);
}

}  // namespace

Corpus synth_corpus(std::size_t pages, std::size_t instances, const SynthParams& params,
                    std::uint64_t seed) {
  if (pages < 2 || instances < 1) {
    throw Error(ErrorCode::kInvalidParams, "need pages >= 2 and instances >= 1");
  }
  if (params.cell_size == 0 || params.min_bursts < 1 || params.max_bursts < params.min_bursts ||
      params.min_response_cells <= 0 || params.max_response_cells < params.min_response_cells ||
      params.max_request_cells < 1 || params.min_gap <= 0 || params.max_gap < params.min_gap ||
      params.server_delay <= 0 || params.incoming_iat <= 0 || params.outgoing_iat <= 0 ||
      params.iat_spread < 0 || params.response_spread < 0 || params.gap_spread < 0 ||
      params.instance_length_jitter < 0 || params.instance_gap_jitter < 0) {
    throw Error(ErrorCode::kInvalidParams, "synthetic generator parameters out of range");
  }
  std::mt19937_64 rng(seed);
  std::vector<PageTemplate> templates;
  templates.reserve(pages);
  for (std::size_t i = 0; i < pages; ++i) templates.push_back(make_page(params, rng));

  std::vector<Trace> traces;
  traces.reserve(pages * instances);
  char name[32];
  for (std::size_t i = 0; i < pages; ++i) {
    std::snprintf(name, sizeof(name), "page%03zu", i);
    for (std::size_t j = 0; j < instances; ++j) {
      traces.push_back(make_instance(templates[i], params, name, rng));
    }
  }
  return Corpus(std::move(traces),
                {{"source", "synthetic"},
                 {"seed", std::to_string(seed)},
                 {"pages", std::to_string(pages)},
                 {"instances", std::to_string(instances)}});
}

TraceFileName parse_trace_file_name(const std::string& filename) {
  const std::string suffix = ".trace";
  if (filename.size() <= suffix.size() ||
      filename.compare(filename.size() - suffix.size(), suffix.size(), suffix) != 0) {
    throw Error(ErrorCode::kIo, "not a trace file: " + filename);
  }
  const std::string stem = filename.substr(0, filename.size() - suffix.size());
  const auto dash = stem.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == stem.size()) {
    throw Error(ErrorCode::kIo, "expected <label>-<instance>.trace: " + filename);
  }
  const std::string digits = stem.substr(dash + 1);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kIo, "instance is not a number: " + filename);
  }
  return {stem.substr(0, dash), static_cast<std::size_t>(std::stoull(digits))};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Corpus load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  struct Entry {
    TraceFileName name;
    fs::path path;
  };
  std::vector<Entry> entries;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".trace") continue;
    entries.push_back({parse_trace_file_name(de.path().filename().string()), de.path()});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.name.label, a.name.instance) < std::tie(b.name.label, b.name.instance);
  });
  std::vector<Trace> traces;
  traces.reserve(entries.size());
  for (const auto& e : entries) traces.push_back(parse_trace(read_file(e.path), e.name.label));
  if (traces.empty()) throw Error(ErrorCode::kIo, "no .trace files in " + dir.string());
  return Corpus(std::move(traces), {{"source", dir.string()}});
}

void save_corpus(const Corpus& corpus, const fs::path& dir, bool annotate) {
  fs::create_directories(dir);
  std::unordered_map<std::string, std::size_t> next_instance;
  for (const auto& t : corpus) {
    const auto instance = next_instance[t.label()]++;
    write_file(dir / (t.label() + "-" + std::to_string(instance) + ".trace"),
               serialize_trace(t, annotate));
  }
}

}  // namespace wtfpad
