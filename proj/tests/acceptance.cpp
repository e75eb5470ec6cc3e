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

// End-to-end acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance <path-to-wtfpad-cli>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "wtfpad/baselines.hpp"
#include "wtfpad/cli.hpp"
#include "wtfpad/corpus.hpp"
#include "wtfpad/error.hpp"
#include "wtfpad/evaluation.hpp"
#include "wtfpad/fitting.hpp"
#include "wtfpad/histogram.hpp"
#include "wtfpad/padding.hpp"
#include "wtfpad/simulator.hpp"

namespace fs = std::filesystem;
using namespace wtfpad;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && failures_.empty()) failures_ = what;
    pass_ = pass_ && ok;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome done() const { return {pass_, pass_ ? notes_ : failures_ + " | " + notes_}; }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

HistogramSet fitted(const Corpus& c, FitFamily family, double p, std::uint64_t seed) {
  MaterializeOptions o;
  o.family = family;
  o.percentile = p;
  std::mt19937_64 rng(seed);
  return materialize_histograms(split_burst_gap(c, 2), o, rng).histograms;
}

// 1 ---------------------------------------------------------------------------
Outcome zero_latency() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto corpus = synth_corpus(50, 20, {}, 101);
  const auto h = fitted(corpus, FitFamily::kNormal, 0.4, 1);
  const auto padded = simulate_corpus(corpus, h, {}, 7);
  std::size_t checked = 0, dummies = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::size_t j = 0;
    for (const auto& e : padded[i]) {
      if (e.kind != PacketKind::kReal) {
        dummies += e.kind == PacketKind::kDummy;
        continue;
      }
      const auto& o = corpus[i][j++];
      c.require(e.time == o.time && e.direction == o.direction && e.size == o.size,
                "real packet moved in trace " + std::to_string(i));
      ++checked;
    }
    c.require(j == corpus[i].size(), "real packets missing in trace " + std::to_string(i));
  }
  const double secs = seconds_since(t0);
  c.require(corpus.size() == 1000, "corpus size");
  c.require(dummies > 0, "no padding produced");
  c.require(secs < 60.0, "runtime " + num(secs) + " s");
  c.note("1000 traces, " + std::to_string(checked) + " real packets bit-exact, " +
         std::to_string(dummies) + " dummies, " + num(secs, 3) + " s");
  return c.done();
}

// 2 ---------------------------------------------------------------------------
double mean_draws_until_infinity(TokenHistogram h, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    h.refill();
    for (int draws = 1;; ++draws) {
      const double d = h.sample(rng);
      h.consume_token(d);
      if (std::isinf(d)) {
        total += draws;
        break;
      }
    }
  }
  return total / trials;
}

Outcome worked_example() {
  Check c;
  std::vector<std::uint32_t> tokens(20, 0);
  for (std::size_t i = 0; i < 15; ++i) tokens[i] = 20;  // K = 300
  TokenHistogram ceil_h(20, 1.0, tokens, RoundingMode::kCeiling);
  TokenHistogram near_h(20, 1.0, tokens, RoundingMode::kNearest);
  ceil_h.set_infinity_tokens_burst(0.1);
  near_h.set_infinity_tokens_burst(0.1);
  c.require(ceil_h.infinity_tokens() == 34, "ceiling k_n = " + std::to_string(ceil_h.infinity_tokens()));
  c.require(near_h.infinity_tokens() == 33, "nearest k_n = " + std::to_string(near_h.infinity_tokens()));
  for (const auto* h : {&ceil_h, &near_h}) {
    const double kn = h->infinity_tokens();
    const double oracle = (300.0 + kn + 1.0) / (kn + 1.0);
    const double mc = mean_draws_until_infinity(*h, 100000, 42 + static_cast<int>(kn));
    c.require(std::abs(mc - oracle) <= 0.02 * oracle, "E[L] " + num(mc) + " vs " + num(oracle));
    c.note("k_n=" + num(kn) + " E[L] MC " + num(mc) + " vs " + num(oracle));
  }
  return c.done();
}

// 3 ---------------------------------------------------------------------------
Outcome sampling_frequencies() {
  Check c;
  std::mt19937_64 gen(314);
  std::mt19937_64 rng(159);
  const int draws = 100000;
  double worst = 0.0;
  for (int round = 0; round < 10; ++round) {
    const std::size_t n = 5 + gen() % 16;
    std::vector<std::uint32_t> tokens(n);
    for (auto& k : tokens) k = static_cast<std::uint32_t>(gen() % 60);
    tokens[gen() % n] += 1;
    const TokenHistogram h(n, 0.5 + static_cast<double>(gen() % 100) / 10.0, tokens);
    const double total = std::accumulate(tokens.begin(), tokens.end(), 0.0);
    std::vector<int> counts(n, 0);
    for (int i = 0; i < draws; ++i) ++counts[h.bin_index(h.sample(rng))];
    for (std::size_t b = 0; b < n; ++b) {
      const double p = tokens[b] / total;
      const double sd = std::sqrt(draws * p * (1.0 - p));
      const double dev = std::abs(counts[b] - draws * p);
      if (sd > 0) worst = std::max(worst, dev / sd);
      c.require(sd > 0 ? dev <= 3.0 * sd : counts[b] == static_cast<int>(draws * p),
                "histogram " + std::to_string(round) + " bin " + std::to_string(b));
    }
  }
  c.note("10 histograms x 1e5 draws, worst deviation " + num(worst, 3) + " sigma");
  return c.done();
}

// 4 ---------------------------------------------------------------------------
Outcome token_accounting() {
  Check c;
  std::mt19937_64 rng(27182);
  std::size_t ops_total = 0, refills = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    const std::size_t n = 2 + rng() % 11;
    std::vector<std::uint32_t> init(n);
    for (auto& k : init) k = static_cast<std::uint32_t>(rng() % 5);
    init[rng() % n] += 1;
    const std::uint64_t initial_total = std::accumulate(init.begin(), init.end(), std::uint64_t{0});
    TokenHistogram h(n, 1.0, init);
    auto pick = [&] {
      const std::size_t b = rng() % n;
      if (b + 1 == n) return kInfinity;
      const auto iv = h.interval(b);
      return std::uniform_real_distribution<double>(iv.lower, iv.upper)(rng);
    };
    std::uint64_t expected_total = initial_total;
    const int ops = 1 + static_cast<int>(rng() % 60);
    for (int op = 0; op < ops; ++op, ++ops_total) {
      bool refilled;
      if (rng() % 3 == 0 && h.total_tokens() > 0) {
        double sampled = pick(), actual = pick();
        if (std::isinf(sampled)) sampled = 0.99;
        if (std::isinf(actual) || actual > sampled) actual = sampled / 2;
        refilled = h.return_token(sampled, actual);
        // +1 back, -1 taken: total unchanged unless a refill intervened
      } else {
        refilled = h.consume_token(pick());
        if (!refilled) --expected_total;
      }
      if (refilled) {
        ++refills;
        expected_total = initial_total - 1;
      }
      c.require(h.total_tokens() == expected_total,
                "total not conserved, sequence " + std::to_string(seq));
      for (auto k : h.tokens()) c.require(k <= (1u << 20), "negative (wrapped) count");
    }
    h.refill();
    c.require(h.tokens() == init, "refill did not restore snapshot");
  }
  c.note("1e4 sequences, " + std::to_string(ops_total) + " ops, " + std::to_string(refills) +
         " refills");
  return c.done();
}

// 5 ---------------------------------------------------------------------------
TokenHistogram only(bool finite) {
  return finite ? TokenHistogram(4, 1.0, {0, 0, 50, 0}) : TokenHistogram(4, 1.0, {0, 0, 0, 50});
}

Outcome state_machine() {
  Check c;
  using E = MachineEventType;
  using A = ActionType;
  std::mt19937_64 rng(5);
  std::size_t cases = 0;
  // Expected outcome from the transition rules, computed independently.
  auto expect = [](Mode from, E ev, bool b_fin, bool g_fin, std::vector<A>& acts) -> Mode {
    const bool trigger = ev != E::kTimeoutExpired;
    if (trigger) {
      if (b_fin) {
        acts.push_back(A::kSetTimer);
        return Mode::kBurst;
      }
      if (from != Mode::kIdle) acts.push_back(A::kCancelTimer);
      return Mode::kIdle;
    }
    acts.push_back(A::kSendDummy);
    if (g_fin) {
      acts.push_back(A::kSetTimer);
      return Mode::kGap;
    }
    if (b_fin) {
      acts.push_back(A::kSetTimer);
      return Mode::kBurst;
    }
    return Mode::kIdle;
  };
  for (auto role : {MachineRole::kSend, MachineRole::kReceive}) {
    for (auto from : {Mode::kIdle, Mode::kBurst, Mode::kGap}) {
      for (auto ev : {E::kPushReal, E::kReceive, E::kStartOfTransmission, E::kTimeoutExpired}) {
        for (int draw = 0; draw < 4; ++draw) {
          const bool b_fin = draw & 1, g_fin = draw & 2;
          PaddingMachine m(role, only(true), only(true));
          if (from != Mode::kIdle) m.step({E::kStartOfTransmission, 0.0}, rng);
          if (from == Mode::kGap) m.step({E::kTimeoutExpired, *m.pending_delay()}, rng);
          m.set_histograms(only(b_fin), only(g_fin));
          const bool own_trigger = ev == E::kStartOfTransmission ||
                                   (ev == E::kPushReal && role == MachineRole::kSend) ||
                                   (ev == E::kReceive && role == MachineRole::kReceive);
          const bool valid = ev == E::kTimeoutExpired ? from != Mode::kIdle : own_trigger;
          ++cases;
          const double now = m.pending_delay() ? m.timer_start() + 0.1 : 0.0;
          if (!valid) {
            bool threw = false;
            try {
              m.step({ev, now}, rng);
            } catch (const Error& e) {
              threw = e.code() == ErrorCode::kInvalidTransition;
            }
            c.require(threw, "invalid event accepted");
            continue;
          }
          std::vector<A> want;
          if (ev == E::kPushReal && role == MachineRole::kSend) want.push_back(A::kSendReal);
          const Mode to = expect(from, ev, b_fin, g_fin, want);
          std::vector<A> got;
          for (const auto& a : m.step({ev, now}, rng)) got.push_back(a.type);
          c.require(got == want && m.mode() == to,
                    "transition mismatch from " + std::string(to_string(from)));
        }
      }
    }
  }
  c.note(std::to_string(cases) + " (role, mode, event, draw) cases");

  // Soft stop: every seeded session ends with both endpoints idle.
  SynthParams small;
  small.min_bursts = 3;
  small.max_bursts = 8;
  const auto corpus = synth_corpus(10, 10, small, 55);
  const auto h = fitted(corpus, FitFamily::kNormal, 0.4, 2);
  std::size_t stopped = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Endpoint client(EndpointRole::kClient, h);
    Endpoint bridge(EndpointRole::kBridge, h);
    simulate(corpus[s % corpus.size()], client, bridge, {}, 9000 + s);
    stopped += client.quiescent() && bridge.quiescent();
  }
  c.require(stopped == 1000, std::to_string(stopped) + "/1000 soft stops");
  c.note(std::to_string(stopped) + "/1000 sessions reached soft stop");
  return c.done();
}

// 6 ---------------------------------------------------------------------------
double median_finite(const TokenHistogram& h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> d;
  while (d.size() < 20000) {
    const double x = h.sample(rng);
    if (std::isfinite(x)) d.push_back(x);
  }
  return median(d);
}

Outcome tuning() {
  Check c;
  const auto corpus = synth_corpus(20, 20, {}, 606);
  const auto split = split_burst_gap(corpus, 2);
  for (auto fam : {FitFamily::kNormal, FitFamily::kLogNormal}) {
    const auto fit = fit_mle(split.outgoing.gap_samples, fam);
    const auto same = tune(fit, 0.5);
    c.require(same.mu == fit.mu && same.sigma == fit.sigma, "p=0.5 not identity");
    double prev = -INFINITY;
    for (int i = 1; i <= 20; ++i) {
      const double mu = tune(fit, 0.5 * i / 20.0).mu;
      c.require(mu > prev, "mu' not strictly increasing");
      prev = mu;
    }
    MaterializeOptions o;
    o.family = fam;
    o.token_budget = 10000;
    o.percentile = 0.5;
    std::mt19937_64 r1(3), r2(3);
    const auto wide = materialize_histograms(split, o, r1);
    o.percentile = 0.1;
    const auto tight = materialize_histograms(split, o, r2);
    const double m_wide = median_finite(wide.histograms.outgoing_burst, 4);
    const double m_tight = median_finite(tight.histograms.outgoing_burst, 4);
    c.require(m_tight < m_wide, "median H_B not smaller at p=0.1");
    c.note(std::string(to_string(fam)) + ": median H_B " + num(m_tight) + " s (p=0.1) < " +
           num(m_wide) + " s (p=0.5)");
  }
  return c.done();
}

// 7 ---------------------------------------------------------------------------
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (i + j) / 2.0 + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = mean(ra), mb = mean(rb);
  double num_ = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num_ += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num_ / std::sqrt(da * db);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("wtfpad_accept_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Outcome percentile_sweep() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  TempDir dir("sweep");
  const auto corpus = synth_corpus(20, 20, {}, 707);
  save_corpus(corpus, dir / "corpus");
  const int rc = cli::run({"sweep", "--corpus", dir / "corpus", "--out", dir / "out", "--family",
                           "lognormal", "--repeats", "6", "--seed", "11"});
  c.require(rc == 0, "sweep exited " + std::to_string(rc));
  if (rc != 0) return c.done();
  const auto rows = csv_rows(read_file(dir / "out/sweep.csv"));
  std::vector<double> p, bw, acc;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    p.push_back(std::stod(rows[i][0]));
    bw.push_back(std::stod(rows[i][1]));
    acc.push_back(std::stod(rows[i][2]));
  }
  c.require(p.size() == 7, "expected 7 grid points");
  const double rho = spearman(p, bw);
  const double raw = closed_world_eval(corpus, {}, 11).accuracy;
  const double strongest = acc[static_cast<std::size_t>(std::min_element(p.begin(), p.end()) - p.begin())];
  const double secs = seconds_since(t0);
  c.require(rho <= -0.9, "Spearman rho " + num(rho));
  c.require(strongest <= 0.5 * raw, "accuracy at p=0.01 " + num(strongest) + " vs raw " + num(raw));
  c.require(secs < 600.0, "runtime " + num(secs) + " s");
  std::string curve;
  for (std::size_t i = 0; i < p.size(); ++i) curve += num(p[i], 2) + ":" + num(bw[i], 3) + " ";
  c.note("20x20 lognormal, 6 seeds; median bw " + curve + "; Spearman " + num(rho, 3) +
         "; accuracy " + num(strongest, 3) + " vs raw " + num(raw, 3) + "; " + num(secs, 3) + " s");
  return c.done();
}

// 8 ---------------------------------------------------------------------------
Outcome defense_ordering() {
  Check c;
  std::vector<double> d_acc, d_auc, d_proc;
  double raw_acc = 0, prot_acc = 0, raw_auc = 0, prot_auc = 0, raw_proc = 0, prot_proc = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto corpus = synth_corpus(20, 20, {}, 800 + s);
    const auto h = fitted(corpus, FitFamily::kNormal, 0.4, s);
    const Corpus padded(simulate_corpus(corpus, h, {}, s));
    const auto ra = closed_world_eval(corpus, {}, s).accuracy;
    const auto pa = closed_world_eval(padded, {}, s).accuracy;
    const auto rr = roc_binarized(corpus, {}, s);
    const auto pr = roc_binarized(padded, {}, s);
    d_acc.push_back(ra - pa);
    d_auc.push_back(rr.auc - pr.auc);
    d_proc.push_back(rr.proc_auc - pr.proc_auc);
    raw_acc += ra / 10;
    prot_acc += pa / 10;
    raw_auc += rr.auc / 10;
    prot_auc += pr.auc / 10;
    raw_proc += rr.proc_auc / 10;
    prot_proc += pr.proc_auc / 10;
  }
  auto significant = [&](const std::vector<double>& d, const std::string& name) {
    const double m = mean(d);
    double v = 0;
    for (double x : d) v += (x - m) * (x - m);
    const double se = std::sqrt(v / (d.size() - 1) / d.size());
    c.require(m > 3.0 * se, name + " gap " + num(m) + " not > 3 se " + num(se));
    return num(m / se, 3);
  };
  const auto z1 = significant(d_acc, "accuracy");
  const auto z2 = significant(d_auc, "ROC AUC");
  const auto z3 = significant(d_proc, "P-ROC AUC");
  c.note("10 seeds, normal p=0.4: accuracy " + num(raw_acc, 3) + "->" + num(prot_acc, 3) + " (" +
         z1 + " se), ROC AUC " + num(raw_auc, 3) + "->" + num(prot_auc, 3) + " (" + z2 +
         " se), P-ROC AUC " + num(raw_proc, 3) + "->" + num(prot_proc, 3) + " (" + z3 + " se)");
  return c.done();
}

// 9 ---------------------------------------------------------------------------
Outcome baseline_contrast() {
  Check c;
  const auto corpus = synth_corpus(10, 10, {}, 909);
  const auto h = fitted(corpus, FitFamily::kNormal, 0.4, 9);
  const auto padded = simulate_corpus(corpus, h, {}, 9);
  const TamarawParams tp;
  double min_buflo = INFINITY, min_tamaraw = INFINITY, max_wtfpad = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i];
    min_buflo = std::min(min_buflo, overheads(t, buflo(t, {}), RealEventCheck::kByteCapacity).latency_overhead);
    const auto tam = tamaraw(t, tp);
    min_tamaraw = std::min(min_tamaraw, overheads(t, tam, RealEventCheck::kByteCapacity).latency_overhead);
    max_wtfpad = std::max(max_wtfpad, overheads(t, padded[i]).latency_overhead);
    std::size_t out = 0, in = 0;
    for (const auto& e : tam) (e.direction == Direction::kOutgoing ? out : in) += 1;
    c.require(out % tp.pad_multiple == 0 && in % tp.pad_multiple == 0,
              "Tamaraw counts not multiples of L in trace " + std::to_string(i));
  }
  c.require(min_buflo > 0, "BuFLO latency not > 0");
  c.require(min_tamaraw > 0, "Tamaraw latency not > 0");
  c.require(max_wtfpad == 0, "WTF-PAD latency not 0");
  c.note("min latency BuFLO " + num(min_buflo, 3) + ", Tamaraw " + num(min_tamaraw, 3) +
         "; max WTF-PAD " + num(max_wtfpad) + "; Tamaraw counts = 0 mod " +
         std::to_string(tp.pad_multiple));
  return c.done();
}

// 10 --------------------------------------------------------------------------
Outcome randomization_controls() {
  Check c;
  const auto corpus = synth_corpus(20, 20, {}, 1010);
  const auto perm = closed_world_eval(permute_labels(corpus, 77), {}, 3).accuracy;
  const double chance = 1.0 / 20.0;
  const double sd = std::sqrt(chance * (1 - chance) / static_cast<double>(corpus.size()));
  c.require(std::abs(perm - chance) <= 3 * sd,
            "permuted accuracy " + num(perm) + " outside " + num(chance) + " +- " + num(3 * sd));

  const auto roc = roc_binarized(corpus, {}, 3);
  c.require(roc.random_baseline == 200.0 / 400.0, "closed-world P-ROC baseline");
  const auto ow = open_world_eval(corpus, synth_corpus(150, 1, {}, 1011).traces(), {0, 50, 150}, {}, 3);
  for (const auto& r : ow) {
    c.require(r.random_baseline == 400.0 / (400.0 + static_cast<double>(r.world_size)),
              "open-world baseline at " + std::to_string(r.world_size));
  }
  std::mt19937_64 rng(10);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<int> scores(n);
    std::vector<bool> pos(n);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      scores[j] = static_cast<int>(rng() % 6);
      pos[j] = j == 0 || rng() % 4 == 0;
      k += pos[j];
    }
    c.require(proc_curve(scores, pos, 5).random_baseline ==
                  static_cast<double>(k) / static_cast<double>(n),
              "P-ROC baseline differs from positive fraction");
  }
  c.note("permuted accuracy " + num(perm, 3) + " (chance " + num(chance) + " +- " +
         num(3 * sd, 3) + "); P-ROC baselines exact over 1004 cases");
  return c.done();
}

// 11 --------------------------------------------------------------------------
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

Outcome cli_determinism(const std::string& exe) {
  Check c;
  if (exe.empty() || !fs::exists(exe)) {
    c.require(false, "CLI binary not given");
    return c.done();
  }
  TempDir dir("cli");
  auto sh = [&](const std::string& args) {
    const std::string cmd = "'" + exe + "' " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  // Shared inputs for the later subcommands.
  c.require(sh("synth --pages 4 --instances 5 --seed 3 --out '" + (dir / "in") + "'") == 0, "synth input");
  c.require(sh("synth --pages 12 --instances 1 --seed 4 --out '" + (dir / "bg") + "'") == 0, "synth bg");
  const std::vector<std::pair<std::string, std::string>> runs{
      {"synth", "synth --pages 3 --instances 3 --seed 5"},
      {"fit", "fit --corpus '" + (dir / "in") + "' --seed 5"},
      {"simulate", "simulate --corpus '" + (dir / "in") + "' --seed 5 --annotate"},
      {"baseline", "baseline --corpus '" + (dir / "in") + "' --seed 5"},
      {"evaluate", "evaluate --corpus '" + (dir / "in") + "' --padded '" + (dir / "in") +
                       "' --background '" + (dir / "bg") + "' --folds 5 --seed 5"},
      {"sweep", "sweep --corpus '" + (dir / "in") + "' --folds 5 --seed 5"},
  };
  std::string done;
  for (const auto& [name, args] : runs) {
    const auto a = dir / (name + "_a"), b = dir / (name + "_b");
    const int ra = sh(args + " --out '" + a + "'");
    const int rb = sh(args + " --out '" + b + "'");
    const auto sa = snapshot(a), sb = snapshot(b);
    c.require(ra == 0 && rb == 0, name + " failed");
    c.require(!sa.empty() && sa == sb, name + " outputs differ");
    done += name + "(" + std::to_string(sa.size()) + " files) ";
  }
  c.note("byte-identical: " + done);
  return c.done();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"zero-latency invariant", zero_latency},
      {"infinity-token worked example", worked_example},
      {"sampling frequencies", sampling_frequencies},
      {"token accounting", token_accounting},
      {"state machine conformance", state_machine},
      {"tuning identity and monotonicity", tuning},
      {"percentile sweep shape", percentile_sweep},
      {"defense-effect ordering", defense_ordering},
      {"baseline contrast", baseline_contrast},
      {"randomization controls", randomization_controls},
      {"CLI determinism", [&] { return cli_determinism(exe); }},
  };
  std::ofstream report("acceptance_report.txt");
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": "
         << o.detail << "\n";
    std::cout << line.str() << std::flush;
    report << line.str() << std::flush;
  }
  const auto summary = std::to_string(criteria.size() - failed) + "/" +
                       std::to_string(criteria.size()) + " criteria passed\n";
  std::cout << summary;
  report << summary;
  return failed == 0 ? 0 : 1;
}
