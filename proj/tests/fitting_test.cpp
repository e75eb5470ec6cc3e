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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wtfpad/corpus.hpp"
#include "wtfpad/error.hpp"
#include "wtfpad/fitting.hpp"

namespace wtfpad {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

Trace uniform_size(std::initializer_list<std::pair<double, Direction>> rows) {
  std::vector<PacketEvent> ev;
  for (auto [t, d] : rows) ev.push_back({t, d, 1500, PacketKind::kReal});
  return Trace(ev, "t");
}

TEST(NormalQuantile, InvertsTheCdf) {
  for (int i = 1; i < 2000; ++i) {
    const double p = i / 2000.0;
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13) << p;
  }
  for (double p : {1e-10, 1e-6, 1e-3, 0.999, 1 - 1e-9}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)) / p, 1.0, 1e-9);
  }
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_EQ(code_of([] { normal_quantile(0.0); }), ErrorCode::kInvalidPercentile);
}

TEST(FitMle, NormalExample) {
  const std::vector<double> s{1, 2, 3};
  const auto f = fit_mle(s, FitFamily::kNormal);
  EXPECT_DOUBLE_EQ(f.mu, 2.0);
  EXPECT_DOUBLE_EQ(f.sigma, std::sqrt(2.0 / 3.0));
  EXPECT_EQ(f.sample_count, 3u);
  EXPECT_GE(f.ks_statistic, 0.0);
  EXPECT_LE(f.ks_statistic, 1.0);
}

TEST(FitMle, DegenerateAndTooFew) {
  const std::vector<double> e(5, std::numbers::e);
  EXPECT_EQ(code_of([&] { fit_mle(e, FitFamily::kLogNormal); }), ErrorCode::kDegenerateScale);
  const std::vector<double> one{1.0};
  EXPECT_EQ(code_of([&] { fit_mle(one, FitFamily::kNormal); }), ErrorCode::kTooFewSamples);
}

TEST(FitMle, ZeroReplacement) {
  const std::vector<double> s{0.0, 0.5, 2.0};
  const auto f = fit_mle(s, FitFamily::kLogNormal);
  const double l = std::log(0.5), h = std::log(2.0);
  const double mu = (l + l + h) / 3.0;
  EXPECT_NEAR(f.mu, mu, 1e-12);
  EXPECT_NEAR(f.sigma, std::sqrt((2 * (l - mu) * (l - mu) + (h - mu) * (h - mu)) / 3.0), 1e-12);
  EXPECT_EQ(code_of([&] { fit_mle(s, FitFamily::kLogNormal, false); }),
            ErrorCode::kNonPositiveSample);
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_EQ(code_of([&] { fit_mle(zeros, FitFamily::kLogNormal); }),
            ErrorCode::kNonPositiveSample);
}

TEST(FitMle, LogNormalRecovery) {
  std::mt19937_64 rng(42);
  std::lognormal_distribution<double> ln(-5.0, 1.0);
  std::vector<double> s(100000);
  for (auto& x : s) x = ln(rng);
  const auto f = fit_mle(s, FitFamily::kLogNormal);
  EXPECT_NEAR(f.mu, -5.0, 0.02);
  EXPECT_NEAR(f.sigma, 1.0, 0.02);
  EXPECT_LT(f.ks_statistic, 1.63 / std::sqrt(1e5));
}

TEST(KsStatistic, ExactQuantiles) {
  const DistributionFit unit{FitFamily::kNormal, 0.0, 1.0};
  for (std::size_t n : {1u, 7u, 100u, 1000u}) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = normal_quantile((i + 0.5) / static_cast<double>(n));
    EXPECT_NEAR(ks_statistic(q, [&](double x) { return unit.cdf(x); }), 0.5 / n, 1e-12);
  }
  EXPECT_EQ(code_of([] { ks_statistic(std::vector<double>{}, [](double) { return 0.0; }); }),
            ErrorCode::kEmptySamples);
}

// The 1% critical value of the one-sample KS statistic is ~1.63/sqrt(N).
// Over many seeded runs the exceedance rate must not be significantly above
// 1% (one-sided binomial bound at 3 sigma).
TEST(KsStatistic, UniformCriticalValue) {
  const int runs = 500;
  const std::size_t n = 10000;
  int exceed = 0;
  std::vector<double> s(n);
  for (int r = 0; r < runs; ++r) {
    std::mt19937_64 rng(1000 + r);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : s) x = u(rng);
    const double d = ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); });
    exceed += d >= 1.63 / std::sqrt(static_cast<double>(n));
  }
  const double allowed = runs * 0.01 + 3.0 * std::sqrt(runs * 0.01 * 0.99);
  EXPECT_LE(exceed, allowed);
}

TEST(Tune, IdentityAtMedian) {
  for (auto fam : {FitFamily::kNormal, FitFamily::kLogNormal}) {
    const DistributionFit f{fam, -2.3, 0.7, 10, 0.1};
    const auto t = tune(f, 0.5);
    EXPECT_EQ(t.mu, f.mu);
    EXPECT_EQ(t.sigma, f.sigma);
  }
}

TEST(Tune, OneSigmaBelow) {
  const DistributionFit f{FitFamily::kNormal, 0.0, 1.0};
  const auto t = tune(f, normal_cdf(-1.0));
  EXPECT_NEAR(t.mu, -1.0, 1e-12);
  // Oracle: peak density of the tuned normal equals the original density at mu'.
  const double oracle = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * normal_pdf(-1.0));
  EXPECT_NEAR(t.sigma, oracle, 1e-12);
  EXPECT_NEAR(t.sigma, std::exp(0.5), 1e-12);
  EXPECT_NEAR(t.sigma, 1.6487, 1e-4);
}

TEST(Tune, PeakDensityMatchesForArbitraryFits) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const double mu = std::uniform_real_distribution<double>(-6, 3)(rng);
    const double sigma = std::uniform_real_distribution<double>(0.05, 3)(rng);
    const double p = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
    const DistributionFit f{FitFamily::kNormal, mu, sigma};
    const auto t = tune(f, p);
    const double original_density_at_mu_prime = normal_pdf((t.mu - mu) / sigma) / sigma;
    const double tuned_peak = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * t.sigma);
    EXPECT_NEAR(tuned_peak / original_density_at_mu_prime, 1.0, 1e-9);
    EXPECT_NEAR(normal_cdf((t.mu - mu) / sigma), p, 1e-12);
  }
}

TEST(Tune, MonotoneInPercentile) {
  const DistributionFit f{FitFamily::kLogNormal, -3.0, 0.8};
  double prev = -INFINITY;
  for (int i = 1; i <= 20; ++i) {
    const double p = 0.5 * i / 20.0;
    const auto t = tune(f, p);
    EXPECT_GT(t.mu, prev);
    if (p < 0.5) EXPECT_LT(t.mu, f.mu);
    prev = t.mu;
  }
  EXPECT_EQ(code_of([&] { tune(f, 0.0); }), ErrorCode::kInvalidPercentile);
  EXPECT_EQ(code_of([&] { tune(f, 0.51); }), ErrorCode::kInvalidPercentile);
}

TEST(SampleQuantile, NearestRank) {
  EXPECT_EQ(sample_quantile({5, 1, 4, 2, 3}, 0.5), 3.0);
  EXPECT_EQ(sample_quantile({5, 1, 4, 2, 3}, 1.0), 5.0);
  EXPECT_EQ(sample_quantile({5, 1, 4, 2, 3}, 0.0), 1.0);
  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
  EXPECT_EQ(sample_quantile(hundred, 0.99), 99.0);
}

TEST(SplitBurstGap, Example) {
  using D = Direction;
  const Corpus c({uniform_size({{0.0, D::kOutgoing},
                                {0.0, D::kIncoming},
                                {0.001, D::kOutgoing},
                                {0.001, D::kIncoming},
                                {0.002, D::kOutgoing},
                                {0.002, D::kIncoming},
                                {1.0, D::kOutgoing},
                                {1.0, D::kIncoming}})});
  // Fast windows carry 3000 B / 1 ms, the slow one 3000 B / 0.998 s.
  const auto s = split_burst_gap(c, 2, 100000.0);
  for (auto d : {D::kOutgoing, D::kIncoming}) {
    const auto& ds = s.direction(d);
    ASSERT_EQ(ds.burst_samples.size(), 2u);
    EXPECT_NEAR(ds.burst_samples[0], 0.001, 1e-12);
    EXPECT_NEAR(ds.burst_samples[1], 0.001, 1e-12);
    ASSERT_EQ(ds.gap_samples.size(), 1u);
    EXPECT_NEAR(ds.gap_samples[0], 0.998, 1e-12);
  }
  EXPECT_DOUBLE_EQ(s.mean_burst_length, 3.0);

  const auto all_gaps = split_burst_gap(c, 2, INFINITY);
  EXPECT_TRUE(all_gaps.outgoing.burst_samples.empty());
  EXPECT_EQ(all_gaps.outgoing.gap_samples.size(), 3u);
}

TEST(SplitBurstGap, AutoThresholdIsDirectionAverage) {
  const auto c = synth_corpus(3, 4, {}, 1);
  const auto s = split_burst_gap(c, 2);
  for (auto d : {Direction::kOutgoing, Direction::kIncoming}) {
    double bytes = 0, duration = 0;
    for (const auto& t : c) {
      const auto ev = t.filtered(d == Direction::kOutgoing ? DirectionFilter::kOutgoing
                                                           : DirectionFilter::kIncoming);
      for (const auto& e : ev) bytes += e.size;
      duration += ev.back().time - ev.front().time;
    }
    EXPECT_NEAR(s.direction(d).threshold, bytes / duration, 1e-9 * bytes / duration);
  }
}

TEST(SplitBurstGap, ConservationProperty) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = synth_corpus(3, 3, {}, seed);
    for (std::size_t window : {2u, 3u, 5u}) {
      const auto s = split_burst_gap(c, window);
      for (auto [d, f] : {std::pair{Direction::kOutgoing, DirectionFilter::kOutgoing},
                          std::pair{Direction::kIncoming, DirectionFilter::kIncoming}}) {
        std::size_t gaps = 0;
        std::vector<double> all;
        for (const auto& t : c) {
          if (t.filtered(f).size() < window) continue;
          const auto g = interarrival_times(t, f);
          gaps += g.size();
          all.insert(all.end(), g.begin(), g.end());
        }
        const auto& ds = s.direction(d);
        EXPECT_EQ(ds.burst_samples.size() + ds.gap_samples.size(), gaps);
        std::vector<double> merged = ds.burst_samples;
        merged.insert(merged.end(), ds.gap_samples.begin(), ds.gap_samples.end());
        std::sort(merged.begin(), merged.end());
        std::sort(all.begin(), all.end());
        EXPECT_EQ(merged, all);
      }
      EXPECT_GT(s.mean_burst_length, 1.0);
    }
  }
}

TEST(SplitBurstGap, Errors) {
  using D = Direction;
  const Corpus flat({uniform_size({{1.0, D::kOutgoing}, {1.0, D::kOutgoing},
                                   {1.0, D::kIncoming}, {1.0, D::kIncoming}})});
  EXPECT_EQ(code_of([&] { split_burst_gap(flat, 2); }), ErrorCode::kZeroDuration);
  const Corpus lonely({uniform_size({{0.0, D::kOutgoing}, {1.0, D::kIncoming}})});
  EXPECT_EQ(code_of([&] { split_burst_gap(lonely, 2); }), ErrorCode::kTooFewEvents);
  EXPECT_EQ(code_of([&] { split_burst_gap(flat, 1); }), ErrorCode::kInvalidParams);
}

BurstGapSplit synthetic_split(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> gaps(std::log(0.3), 0.6);
  std::lognormal_distribution<double> within(std::log(0.004), 0.5);
  BurstGapSplit s;
  for (auto* d : {&s.outgoing, &s.incoming}) {
    for (int i = 0; i < 2000; ++i) d->gap_samples.push_back(gaps(rng));
    for (int i = 0; i < 8000; ++i) d->burst_samples.push_back(within(rng));
  }
  s.mean_burst_length = 12.0;
  return s;
}

TEST(DrawDelays, MedianPercentileReproducesFit) {
  const auto s = synthetic_split(3);
  for (auto fam : {FitFamily::kLogNormal, FitFamily::kNormal}) {
    const auto fit = fit_mle(s.outgoing.gap_samples, fam);
    std::mt19937_64 rng(4);
    const auto draws = draw_delays(tune(fit, 0.5), 10000, rng);
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(draws.size());
    EXPECT_NEAR(mean / fit.mean(), 1.0, 0.05) << to_string(fam);
  }
}

TEST(Materialize, BudgetAndInfinityTokens) {
  const auto s = synthetic_split(5);
  MaterializeOptions o;
  std::mt19937_64 rng(6);
  const auto m = materialize_histograms(s, o, rng);
  const auto& h = m.histograms;
  for (const auto* x : {&h.outgoing_burst, &h.outgoing_gap, &h.incoming_burst, &h.incoming_gap}) {
    EXPECT_EQ(x->finite_tokens(), o.token_budget);
    EXPECT_EQ(x->bins(), o.bins);
    EXPECT_EQ(x->tokens(), x->initial_tokens());
  }
  EXPECT_EQ(h.outgoing_burst.infinity_tokens(), 33u);             // 0.1/0.9 * 300
  EXPECT_EQ(h.outgoing_gap.infinity_tokens(), 26u);               // 289/11 = 26.27
  EXPECT_EQ(m.fits[0].role, "outgoing_burst");
  EXPECT_EQ(m.fits[0].fit.sample_count, 2000u);                   // H_B from between-burst gaps
  EXPECT_EQ(m.fits[1].fit.sample_count, 8000u);                   // H_G from within-burst gaps
  EXPECT_EQ(m.fits[0].max_delay, sample_quantile(s.outgoing.gap_samples, 0.99));
  const auto report = fit_report(m);
  for (const char* role : {"[outgoing_burst]", "[outgoing_gap]", "[incoming_burst]", "[incoming_gap]"}) {
    EXPECT_NE(report.find(role), std::string::npos);
  }
}

double histogram_median(const TokenHistogram& h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> d;
  while (d.size() < 10000) {
    const double x = h.sample(rng);
    if (std::isfinite(x)) d.push_back(x);
  }
  return sample_quantile(d, 0.5);
}

TEST(Materialize, SmallerPercentileGivesShorterBurstDelays) {
  const auto s = synthetic_split(7);
  for (auto fam : {FitFamily::kLogNormal, FitFamily::kNormal}) {
    MaterializeOptions o;
    o.family = fam;
    o.token_budget = 10000;
    std::mt19937_64 r1(1), r2(1);
    o.percentile = 0.5;
    const auto wide = materialize_histograms(s, o, r1);
    o.percentile = 0.1;
    const auto tight = materialize_histograms(s, o, r2);
    EXPECT_LT(histogram_median(tight.histograms.outgoing_burst, 2),
              histogram_median(wide.histograms.outgoing_burst, 2))
        << to_string(fam);
  }
}

TEST(Materialize, Errors) {
  auto s = synthetic_split(8);
  MaterializeOptions o;
  std::mt19937_64 rng(1);
  o.token_budget = 10;
  EXPECT_EQ(code_of([&] { materialize_histograms(s, o, rng); }), ErrorCode::kInvalidParams);
  o = {};
  s.mean_burst_length = 1.0;
  EXPECT_EQ(code_of([&] { materialize_histograms(s, o, rng); }), ErrorCode::kNoBursts);
}

}  // namespace
}  // namespace wtfpad
