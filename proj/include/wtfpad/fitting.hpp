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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wtfpad/corpus.hpp"
#include "wtfpad/histogram.hpp"

namespace wtfpad {

enum class FitFamily : std::uint8_t {
  kLogNormal,  // normal on log-times
  kNormal,
};

std::string to_string(FitFamily family);
FitFamily parse_fit_family(const std::string& name);

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;
/// Inverse of normal_cdf for p in (0, 1); exact 0 at p = 0.5.
double normal_quantile(double p);

struct DistributionFit {
  FitFamily family = FitFamily::kLogNormal;
  double mu = 0.0;     // location (of log-times for kLogNormal)
  double sigma = 1.0;  // scale, > 0
  std::size_t sample_count = 0;
  double ks_statistic = 0.0;

  double cdf(double x) const noexcept;
  /// Mean of the delay distribution (not of the log).
  double mean() const noexcept;

  /// One delay; normal draws below zero are clamped to 0.
  template <typename Rng>
  double draw(Rng& rng) const {
    std::normal_distribution<double> n(mu, sigma);
    const double v = n(rng);
    if (family == FitFamily::kLogNormal) return std::exp(v);
    return v < 0.0 ? 0.0 : v;
  }
};

/// Inter-arrival samples of one direction, split at a bandwidth threshold.
struct DirectionSplit {
  std::vector<double> burst_samples;  // within bursts, source of H_G
  std::vector<double> gap_samples;    // between bursts, source of H_B
  double threshold = 0.0;             // bytes per second
  std::size_t burst_runs = 0;
  std::size_t burst_run_gaps = 0;     // total gaps inside burst runs
};

struct BurstGapSplit {
  DirectionSplit outgoing;
  DirectionSplit incoming;
  std::size_t window = 2;
  double mean_burst_length = 0.0;  // packets per burst, pooled over directions

  const DirectionSplit& direction(Direction d) const noexcept {
    return d == Direction::kOutgoing ? outgoing : incoming;
  }
};

/// Labels each per-direction inter-arrival gap as burst (instantaneous
/// bandwidth >= threshold) or gap. Without a threshold each direction uses
/// its total bytes over total duration across the corpus.
BurstGapSplit split_burst_gap(const Corpus& corpus, std::size_t window,
                              std::optional<double> threshold = std::nullopt);

/// Maximum-likelihood fit (1/N variance). For kLogNormal zero samples are
/// replaced by the smallest positive sample unless `replace_zeros` is false.
DistributionFit fit_mle(std::span<const double> samples, FitFamily family,
                        bool replace_zeros = true);

/// Two-sided Kolmogorov-Smirnov statistic of the samples against `cdf`.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Moves the location to the p-quantile of the original fit and widens the
/// scale so the tuned peak density equals the original density there.
/// p = 0.5 is the identity.
DistributionFit tune(const DistributionFit& fit, double percentile);

template <typename Rng>
std::vector<double> draw_delays(const DistributionFit& fit, std::size_t count, Rng& rng) {
  std::vector<double> out(count);
  for (auto& v : out) v = fit.draw(rng);
  return out;
}

/// Nearest-rank quantile of an unsorted sample, q in [0, 1].
double sample_quantile(std::vector<double> samples, double q);

struct MaterializeOptions {
  FitFamily family = FitFamily::kLogNormal;
  double percentile = 0.5;
  std::size_t bins = 20;
  std::optional<double> max_delay;  // default: 99th percentile of each role's samples
  std::size_t token_budget = 300;
  double infinity_probability_burst = 0.1;
  RoundingMode rounding = RoundingMode::kNearest;
};

struct RoleFit {
  std::string role;  // e.g. "outgoing_burst"
  DistributionFit fit;
  DistributionFit tuned;
  double max_delay = 0.0;
  double holdout_ks = 0.0;  // fit on even-indexed samples, tested on odd-indexed ones
};

struct Materialization {
  HistogramSet histograms;
  std::array<RoleFit, 4> fits;  // same order as HistogramSet's members
  double mean_burst_length = 0.0;
};

/// Fits, tunes, and samples token_budget delays per role into histograms.
/// Burst histograms (H_B) come from gap samples and get infinity tokens from
/// the burst probability; gap histograms (H_G) come from burst samples and
/// get infinity tokens matching the mean burst length.
Materialization materialize_histograms(const BurstGapSplit& split,
                                       const MaterializeOptions& options,
                                       std::mt19937_64& rng);

/// Structured text: one `key=value` block per role.
std::string fit_report(const Materialization& m);

}  // namespace wtfpad
