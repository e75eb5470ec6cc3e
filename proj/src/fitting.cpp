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

#include "wtfpad/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wtfpad/error.hpp"

namespace wtfpad {

std::string to_string(FitFamily family) {
  return family == FitFamily::kLogNormal ? "lognormal" : "normal";
}

FitFamily parse_fit_family(const std::string& name) {
  if (name == "lognormal") return FitFamily::kLogNormal;
  if (name == "normal") return FitFamily::kNormal;
  throw Error(ErrorCode::kInvalidParams, "unknown fit family '" + name + "'");
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::kInvalidPercentile, "p must be in (0, 1)");
  if (p == 0.5) return 0.0;
  // Acklam's rational approximation, refined by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double DistributionFit::cdf(double x) const noexcept {
  if (family == FitFamily::kLogNormal) {
    if (x <= 0.0) return 0.0;
    return normal_cdf((std::log(x) - mu) / sigma);
  }
  return normal_cdf((x - mu) / sigma);
}

double DistributionFit::mean() const noexcept {
  if (family == FitFamily::kLogNormal) return std::exp(mu + 0.5 * sigma * sigma);
  return mu;
}

namespace {

struct DirectionAccumulator {
  DirectionSplit split;
  std::uint64_t bytes = 0;
  double duration = 0.0;
  // Per trace: (inter-arrival gap, window bandwidth) in order.
  std::vector<std::vector<std::pair<double, double>>> gaps;
};

void collect(const Trace& trace, Direction dir, std::size_t window, DirectionAccumulator& acc) {
  const auto events = trace.filtered(dir == Direction::kOutgoing ? DirectionFilter::kOutgoing
                                                                 : DirectionFilter::kIncoming);
  if (events.empty()) return;
  for (const auto& e : events) acc.bytes += e.size;
  acc.duration += events.back().time - events.front().time;
  if (events.size() < window) return;
  const Trace single(events, trace.label());
  const auto bandwidth = instantaneous_bandwidth(single, window);
  std::vector<std::pair<double, double>> per_gap;
  per_gap.reserve(events.size() - 1);
  for (std::size_t g = 0; g + 1 < events.size(); ++g) {
    const auto w = std::min(g, bandwidth.size() - 1);
    per_gap.emplace_back(events[g + 1].time - events[g].time, bandwidth[w].bytes_per_second);
  }
  acc.gaps.push_back(std::move(per_gap));
}

void label(DirectionAccumulator& acc, double threshold) {
  auto& s = acc.split;
  s.threshold = threshold;
  for (const auto& trace_gaps : acc.gaps) {
    bool in_run = false;
    for (const auto& [gap, bw] : trace_gaps) {
      if (bw >= threshold) {
        s.burst_samples.push_back(gap);
        ++s.burst_run_gaps;
        if (!in_run) ++s.burst_runs;
        in_run = true;
      } else {
        s.gap_samples.push_back(gap);
        in_run = false;
      }
    }
  }
}

}  // namespace

BurstGapSplit split_burst_gap(const Corpus& corpus, std::size_t window,
                              std::optional<double> threshold) {
  if (window < 2) throw Error(ErrorCode::kInvalidParams, "window must be >= 2");
  if (threshold && (std::isnan(*threshold) || *threshold < 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "threshold must be >= 0");
  }
  DirectionAccumulator out_acc;
  DirectionAccumulator in_acc;
  for (const auto& t : corpus) {
    collect(t, Direction::kOutgoing, window, out_acc);
    collect(t, Direction::kIncoming, window, in_acc);
  }
  for (auto* acc : {&out_acc, &in_acc}) {
    if (acc->gaps.empty()) {
      throw Error(ErrorCode::kTooFewEvents,
                  "no trace has >= " + std::to_string(window) + " packets in a direction");
    }
    double t;
    if (threshold) {
      t = *threshold;
    } else {
      if (!(acc->duration > 0.0)) throw Error(ErrorCode::kZeroDuration, "direction spans no time");
      t = static_cast<double>(acc->bytes) / acc->duration;
    }
    label(*acc, t);
  }
  BurstGapSplit split;
  split.window = window;
  split.outgoing = std::move(out_acc.split);
  split.incoming = std::move(in_acc.split);
  const auto runs = split.outgoing.burst_runs + split.incoming.burst_runs;
  const auto run_gaps = split.outgoing.burst_run_gaps + split.incoming.burst_run_gaps;
  split.mean_burst_length =
      runs == 0 ? 0.0 : static_cast<double>(run_gaps) / static_cast<double>(runs) + 1.0;
  return split;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorCode::kEmptySamples, "KS needs samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double upper = static_cast<double>(i + 1) / n;
    const double lower = static_cast<double>(i) / n;
    d = std::max({d, std::abs(upper - f), std::abs(lower - f)});
  }
  return std::min(d, 1.0);
}

DistributionFit fit_mle(std::span<const double> samples, FitFamily family, bool replace_zeros) {
  if (samples.size() < 2) throw Error(ErrorCode::kTooFewSamples, "need >= 2 samples");
  std::vector<double> values(samples.begin(), samples.end());
  for (double v : values) {
    if (std::isnan(v) || std::isinf(v)) throw Error(ErrorCode::kInvalidParams, "non-finite sample");
  }
  if (family == FitFamily::kLogNormal) {
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : values) {
      if (v > 0.0) smallest = std::min(smallest, v);
    }
    for (double& v : values) {
      if (v > 0.0) continue;
      if (v < 0.0 || !replace_zeros || std::isinf(smallest)) {
        throw Error(ErrorCode::kNonPositiveSample, "log-normal fit needs positive samples");
      }
      v = smallest;
    }
    for (double& v : values) v = std::log(v);
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (!(var > 0.0)) throw Error(ErrorCode::kDegenerateScale, "all samples identical");

  DistributionFit fit;
  fit.family = family;
  fit.mu = mean;
  fit.sigma = std::sqrt(var);
  fit.sample_count = samples.size();
  fit.ks_statistic = ks_statistic(samples, [&fit](double x) { return fit.cdf(x); });
  return fit;
}

DistributionFit tune(const DistributionFit& fit, double percentile) {
  if (!(percentile > 0.0 && percentile <= 0.5)) {
    throw Error(ErrorCode::kInvalidPercentile, "percentile must be in (0, 0.5]");
  }
  const double z = normal_quantile(percentile);
  DistributionFit tuned = fit;
  tuned.mu = fit.mu + fit.sigma * z;
  // 1 / (sqrt(2 pi) f(mu')) with f the original density, simplified.
  tuned.sigma = fit.sigma * std::exp(0.5 * z * z);
  return tuned;
}

double sample_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw Error(ErrorCode::kEmptySamples, "quantile of nothing");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::kInvalidParams, "q must be in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return samples[rank - 1];
}

namespace {

RoleFit materialize_role(const std::string& role, const std::vector<double>& samples,
                         const MaterializeOptions& options, std::mt19937_64& rng,
                         TokenHistogram& out) {
  RoleFit rf;
  rf.role = role;
  rf.fit = fit_mle(samples, options.family);
  rf.tuned = tune(rf.fit, options.percentile);
  if (samples.size() >= 4) {
    std::vector<double> even, odd;
    for (std::size_t i = 0; i < samples.size(); ++i) (i % 2 ? odd : even).push_back(samples[i]);
    try {
      const auto half = fit_mle(even, options.family);
      rf.holdout_ks = ks_statistic(odd, [&half](double x) { return half.cdf(x); });
    } catch (const Error&) {
      rf.holdout_ks = 1.0;
    }
  }
  rf.max_delay = options.max_delay ? *options.max_delay : sample_quantile(samples, 0.99);
  if (!(rf.max_delay > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, role + ": 99th percentile of samples is not positive");
  }
  const auto delays = draw_delays(rf.tuned, options.token_budget, rng);
  out = build_histogram(options.bins, rf.max_delay, delays);
  out.set_rounding(options.rounding);
  return rf;
}

}  // namespace

Materialization materialize_histograms(const BurstGapSplit& split,
                                       const MaterializeOptions& options,
                                       std::mt19937_64& rng) {
  if (options.token_budget < options.bins) {
    throw Error(ErrorCode::kInvalidParams, "token budget must be >= bin count");
  }
  if (!(split.mean_burst_length > 1.0)) {
    throw Error(ErrorCode::kNoBursts, "split contains no burst runs");
  }
  Materialization m{disabled_histograms(options.bins), {}, split.mean_burst_length};
  m.fits[0] = materialize_role("outgoing_burst", split.outgoing.gap_samples, options, rng,
                               m.histograms.outgoing_burst);
  m.fits[1] = materialize_role("outgoing_gap", split.outgoing.burst_samples, options, rng,
                               m.histograms.outgoing_gap);
  m.fits[2] = materialize_role("incoming_burst", split.incoming.gap_samples, options, rng,
                               m.histograms.incoming_burst);
  m.fits[3] = materialize_role("incoming_gap", split.incoming.burst_samples, options, rng,
                               m.histograms.incoming_gap);
  m.histograms.outgoing_burst.set_infinity_tokens_burst(options.infinity_probability_burst);
  m.histograms.incoming_burst.set_infinity_tokens_burst(options.infinity_probability_burst);
  m.histograms.outgoing_gap.set_infinity_tokens_gap(split.mean_burst_length);
  m.histograms.incoming_gap.set_infinity_tokens_gap(split.mean_burst_length);
  return m;
}

std::string fit_report(const Materialization& m) {
  std::ostringstream os;
  os.precision(17);
  os << "mean_burst_length=" << m.mean_burst_length << "\n";
  for (const auto& rf : m.fits) {
    os << "\n[" << rf.role << "]\n"
       << "family=" << to_string(rf.fit.family) << "\n"
       << "samples=" << rf.fit.sample_count << "\n"
       << "mu=" << rf.fit.mu << "\n"
       << "sigma=" << rf.fit.sigma << "\n"
       << "mu_tuned=" << rf.tuned.mu << "\n"
       << "sigma_tuned=" << rf.tuned.sigma << "\n"
       << "ks=" << rf.fit.ks_statistic << "\n"
       << "holdout_ks=" << rf.holdout_ks << "\n"
       << "max_delay=" << rf.max_delay << "\n";
  }
  return os.str();
}

}  // namespace wtfpad
