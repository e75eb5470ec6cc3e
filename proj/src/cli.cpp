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

#include "wtfpad/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "wtfpad/baselines.hpp"
#include "wtfpad/corpus.hpp"
#include "wtfpad/error.hpp"
#include "wtfpad/evaluation.hpp"
#include "wtfpad/fitting.hpp"
#include "wtfpad/histogram.hpp"
#include "wtfpad/simulator.hpp"

namespace wtfpad::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string corpus;
  std::string out;
  std::uint64_t seed = 1;
  bool annotate = false;

  // histogram construction
  double percentile = 0.4;
  std::string family = "normal";
  std::size_t bins = 20;
  std::optional<double> max_iat;
  std::size_t tokens = 300;
  double pn_burst = 0.1;
  std::size_t window = 2;
  std::uint32_t cell_size = kDefaultCellSize;

  // synth
  std::size_t pages = 20;
  std::size_t instances = 20;

  // simulate
  std::string histograms;
  bool disable_padding = false;
  double delay = 0.0;

  // baseline
  std::string defense = "both";
  double buflo_tau = BufloParams{}.tau;
  double buflo_rho = BufloParams{}.rho;
  double tamaraw_rho_out = TamarawParams{}.rho_out;
  double tamaraw_rho_in = TamarawParams{}.rho_in;
  std::uint32_t tamaraw_l = TamarawParams{}.pad_multiple;

  // evaluate / sweep
  std::vector<std::string> padded;
  std::string background;
  std::vector<std::size_t> world_sizes;
  std::size_t k = 5;
  std::size_t folds = 10;
  std::size_t repeats = 1;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string seed_line(const RunConfig& c) { return "# seed=" + std::to_string(c.seed) + "\n"; }

void write_manifest(const RunConfig& c, const std::string& subcommand,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ostringstream os;
  os << "subcommand=" << subcommand << "\n"
     << "seed=" << c.seed << "\n";
  for (const auto& [k, v] : extra) os << k << "=" << v << "\n";
  write_file(fs::path(c.out) / "manifest.txt", os.str());
}

MaterializeOptions materialize_options(const RunConfig& c) {
  MaterializeOptions o;
  o.family = parse_fit_family(c.family);
  o.percentile = c.percentile;
  o.bins = c.bins;
  o.max_delay = c.max_iat;
  o.token_budget = c.tokens;
  o.infinity_probability_burst = c.pn_burst;
  return o;
}

Materialization fit_corpus(const Corpus& corpus, const RunConfig& c) {
  const auto split = split_burst_gap(corpus, c.window);
  std::mt19937_64 rng(c.seed);
  return materialize_histograms(split, materialize_options(c), rng);
}

SimulationOptions simulation_options(const RunConfig& c) {
  SimulationOptions o;
  o.link.one_way_delay = c.delay;
  o.endpoint.cell_size = c.cell_size;
  return o;
}

std::string overhead_csv(const RunConfig& c, const Corpus& original,
                         const std::vector<Trace>& padded, RealEventCheck check) {
  std::ostringstream os;
  os << seed_line(c) << "label,instance,bw_overhead,lat_overhead,dummies,controls\n";
  std::map<std::string, std::size_t> next_instance;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const auto r = overheads(original[i], padded[i], check);
    os << original[i].label() << "," << next_instance[original[i].label()]++ << ","
       << fmt(r.bandwidth_overhead) << "," << fmt(r.latency_overhead) << "," << r.dummy_count
       << "," << r.control_count << "\n";
  }
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidParams, what);
}

void cmd_synth(const RunConfig& c) {
  require(!c.out.empty(), "--out is required");
  SynthParams p;
  p.cell_size = c.cell_size;
  const auto corpus = synth_corpus(c.pages, c.instances, p, c.seed);
  save_corpus(corpus, c.out, c.annotate);
  write_manifest(c, "synth", {{"pages", std::to_string(c.pages)},
                              {"instances", std::to_string(c.instances)}});
}

void cmd_fit(const RunConfig& c) {
  require(!c.corpus.empty() && !c.out.empty(), "--corpus and --out are required");
  const auto m = fit_corpus(load_corpus(c.corpus), c);
  fs::create_directories(c.out);
  write_file(fs::path(c.out) / "histograms.json", histogram_set_to_json(m.histograms));
  write_file(fs::path(c.out) / "fit_report.txt", seed_line(c) + fit_report(m));
  write_manifest(c, "fit", {{"family", c.family}, {"percentile", fmt(c.percentile)}});
}

void cmd_simulate(const RunConfig& c) {
  require(!c.corpus.empty() && !c.out.empty(), "--corpus and --out are required");
  const auto corpus = load_corpus(c.corpus);
  const HistogramSet set = c.disable_padding          ? disabled_histograms(c.bins)
                           : !c.histograms.empty() ? histogram_set_from_json(read_file(c.histograms))
                                                   : fit_corpus(corpus, c).histograms;
  const auto padded = simulate_corpus(corpus, set, simulation_options(c), c.seed);
  save_corpus(Corpus(padded), fs::path(c.out) / "traces", c.annotate);
  write_file(fs::path(c.out) / "overhead.csv",
             overhead_csv(c, corpus, padded, RealEventCheck::kExact));
  write_file(fs::path(c.out) / "histograms.json", histogram_set_to_json(set));
  write_manifest(c, "simulate", {{"disable_padding", c.disable_padding ? "1" : "0"}});
}

void cmd_baseline(const RunConfig& c) {
  require(!c.corpus.empty() && !c.out.empty(), "--corpus and --out are required");
  require(c.defense == "buflo" || c.defense == "tamaraw" || c.defense == "both",
          "--defense must be buflo, tamaraw or both");
  const auto corpus = load_corpus(c.corpus);
  auto emit = [&](const std::string& name, auto&& defend) {
    std::vector<Trace> out(corpus.size(), corpus[0]);
    for (std::size_t i = 0; i < corpus.size(); ++i) out[i] = defend(corpus[i]);
    const fs::path dir = fs::path(c.out) / name;
    save_corpus(Corpus(out), dir / "traces", c.annotate);
    write_file(dir / "overhead.csv",
               overhead_csv(c, corpus, out, RealEventCheck::kByteCapacity));
  };
  if (c.defense != "tamaraw") {
    const BufloParams p{c.buflo_tau, c.buflo_rho, c.cell_size};
    emit("buflo", [&](const Trace& t) { return buflo(t, p); });
  }
  if (c.defense != "buflo") {
    const TamarawParams p{c.tamaraw_rho_out, c.tamaraw_rho_in, c.cell_size, c.tamaraw_l};
    emit("tamaraw", [&](const Trace& t) { return tamaraw(t, p); });
  }
  write_manifest(c, "baseline", {{"defense", c.defense}});
}

fs::path trace_dir(const std::string& dir) {
  // Accept both a bare corpus directory and a simulate/baseline output.
  const fs::path p(dir);
  return fs::is_directory(p / "traces") ? p / "traces" : p;
}

void cmd_evaluate(const RunConfig& c) {
  require(!c.corpus.empty() && !c.out.empty(), "--corpus and --out are required");
  fs::create_directories(c.out);
  std::vector<std::pair<std::string, std::string>> inputs{{"raw", c.corpus}};
  for (std::size_t i = 0; i < c.padded.size(); ++i) {
    inputs.emplace_back("defended" + std::to_string(i), c.padded[i]);
  }
  const ClosedWorldOptions opts{c.k, c.folds, {}};
  std::ostringstream os;
  os << seed_line(c) << "name,accuracy,roc_auc,proc_auc,random_baseline\n";
  for (const auto& [name, dir] : inputs) {
    const auto corpus = load_corpus(trace_dir(dir));
    const auto closed = closed_world_eval(corpus, opts, c.seed);
    const auto roc = roc_binarized(corpus, opts, c.seed);
    os << name << "," << fmt(closed.accuracy) << "," << fmt(roc.auc) << ","
       << fmt(roc.proc_auc) << "," << fmt(roc.random_baseline) << "\n";
    write_file(fs::path(c.out) / (name + "_roc.csv"), seed_line(c) + curve_csv(roc.roc_points));
    write_file(fs::path(c.out) / (name + "_proc.csv"),
               seed_line(c) + curve_csv(roc.proc_points));
  }
  write_file(fs::path(c.out) / "eval.csv", os.str());

  if (!c.background.empty()) {
    const auto monitored = load_corpus(trace_dir(c.corpus));
    const auto background = load_corpus(trace_dir(c.background));
    auto sizes = c.world_sizes;
    if (sizes.empty()) sizes.push_back(background.size());
    OpenWorldOptions ow;
    ow.folds = c.folds;
    const auto reports = open_world_eval(monitored, background.traces(), sizes, ow, c.seed);
    std::ostringstream ows;
    ows << seed_line(c) << "world_size,tpr,fpr,precision,f1,roc_auc,proc_auc\n";
    for (const auto& r : reports) {
      ows << r.world_size << "," << fmt(r.tpr) << "," << fmt(r.fpr) << "," << fmt(r.precision)
          << "," << fmt(r.f1) << "," << fmt(r.auc) << "," << fmt(r.proc_auc) << "\n";
    }
    write_file(fs::path(c.out) / "open_world.csv", ows.str());
  }
  write_manifest(c, "evaluate", {{"k", std::to_string(c.k)}, {"folds", std::to_string(c.folds)}});
}

void cmd_sweep(const RunConfig& c) {
  require(!c.corpus.empty() && !c.out.empty(), "--corpus and --out are required");
  require(c.repeats >= 1, "--repeats must be >= 1");
  fs::create_directories(c.out);
  const auto corpus = load_corpus(c.corpus);
  const auto split = split_burst_gap(corpus, c.window);
  const ClosedWorldOptions opts{c.k, c.folds, {}};
  std::ostringstream os;
  os << seed_line(c) << "percentile,median_bw_overhead,mean_accuracy\n";
  for (const double p : sweep_percentiles()) {
    RunConfig pc = c;
    pc.percentile = p;
    std::vector<double> bw;
    std::vector<double> acc;
    for (std::size_t r = 0; r < c.repeats; ++r) {
      const std::uint64_t seed = c.seed + r;
      std::mt19937_64 rng(seed);
      const auto m = materialize_histograms(split, materialize_options(pc), rng);
      const auto padded = simulate_corpus(corpus, m.histograms, simulation_options(c), seed);
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        bw.push_back(overheads(corpus[i], padded[i]).bandwidth_overhead);
      }
      acc.push_back(closed_world_eval(Corpus(padded), opts, seed).accuracy);
    }
    os << fmt(p) << "," << fmt(median(bw)) << "," << fmt(mean(acc)) << "\n";
  }
  write_file(fs::path(c.out) / "sweep.csv", os.str());
  write_manifest(c, "sweep", {{"repeats", std::to_string(c.repeats)}});
}

}  // namespace

const std::vector<double>& sweep_percentiles() {
  static const std::vector<double> grid{0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01};
  return grid;
}

int run(const std::vector<std::string>& args) {
  RunConfig c;
  CLI::App app{"Adaptive link padding: fit, simulate, evaluate", "wtfpad"};
  app.set_config("--config", "", "flat key=value file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.add_option("--seed", c.seed, "base seed")->capture_default_str();
  app.add_option("--cell-size", c.cell_size, "cell size d in bytes");
  app.add_flag("--annotate", c.annotate, "mark packet kinds (R|D|C) in trace output");

  // Every knob lives on the root so a flat config file can set it; the
  // subcommands fall through to these.
  app.add_option("--corpus", c.corpus, "input corpus directory");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--percentile", c.percentile, "tuning percentile p in (0, 0.5]");
  app.add_option("--family", c.family, "fit family")
      ->check(CLI::IsMember({"normal", "lognormal"}));
  app.add_option("--bins", c.bins, "histogram bins n");
  app.add_option("--max-iat", c.max_iat, "largest finite delay M (s); default per-role p99");
  app.add_option("--tokens", c.tokens, "token budget K");
  app.add_option("--pn-burst", c.pn_burst, "infinity-token probability in burst histograms");
  app.add_option("--window", c.window, "bandwidth window in packets");
  app.add_option("--pages", c.pages, "synth: page count");
  app.add_option("--instances", c.instances, "synth: instances per page");
  app.add_option("--histograms", c.histograms, "simulate: histograms.json; default: fit the corpus");
  app.add_flag("--disable-padding", c.disable_padding, "simulate: empty histograms");
  app.add_option("--delay", c.delay, "one-way link delay (s)");
  app.add_option("--defense", c.defense, "baseline: buflo, tamaraw or both")
      ->check(CLI::IsMember({"buflo", "tamaraw", "both"}));
  app.add_option("--buflo-tau", c.buflo_tau);
  app.add_option("--buflo-rho", c.buflo_rho);
  app.add_option("--tamaraw-rho-out", c.tamaraw_rho_out);
  app.add_option("--tamaraw-rho-in", c.tamaraw_rho_in);
  app.add_option("--tamaraw-l", c.tamaraw_l);
  app.add_option("--padded", c.padded, "evaluate: defended corpora (repeatable)");
  app.add_option("--background", c.background, "evaluate: open-world background corpus");
  app.add_option("--world-sizes", c.world_sizes, "evaluate: background sizes");
  app.add_option("--k", c.k, "neighbors");
  app.add_option("--folds", c.folds, "cross-validation folds");
  app.add_option("--repeats", c.repeats, "sweep: seeds per grid point");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus")->fallthrough();
  auto* fit = app.add_subcommand("fit", "fit inter-arrival distributions and build histograms")
                  ->fallthrough();
  auto* sim = app.add_subcommand("simulate", "pad every trace of a corpus")->fallthrough();
  auto* base = app.add_subcommand("baseline", "apply BuFLO and/or Tamaraw")->fallthrough();
  auto* eval = app.add_subcommand("evaluate", "k-NN attack on raw and defended corpora")
                   ->fallthrough();
  auto* sweep = app.add_subcommand("sweep", "overhead and accuracy over the percentile grid")
                    ->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) cmd_synth(c);
    if (*fit) cmd_fit(c);
    if (*sim) cmd_simulate(c);
    if (*base) cmd_baseline(c);
    if (*eval) cmd_evaluate(c);
    if (*sweep) cmd_sweep(c);
  } catch (const Error& e) {
    std::cerr << "wtfpad: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "wtfpad: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace wtfpad::cli
