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
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wtfpad {

namespace detail {
[[noreturn]] void throw_empty_histogram();
}  // namespace detail

/// Delay value returned when the infinity bin is drawn.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RoundingMode : std::uint8_t { kNearest, kCeiling };

struct BinInterval {
  double lower;  // inclusive
  double upper;  // exclusive; +inf for the last bin
};

/// Exponentially spaced bins over [0, +inf): bin 0 is [0, M/2^(n-2)),
/// bin i in 1..n-2 is [M/2^(n-1-i), M/2^(n-2-i)), bin n-1 is [M, +inf).
/// Indices are zero-based here; bin n-1 is the infinity bin.
std::vector<BinInterval> bin_boundaries(std::size_t bins, double max_delay);

/// Token-counted delay histogram driving adaptive padding.
///
/// Sampling picks a token uniformly (bin i with probability k_i / sum k),
/// then a delay uniformly inside the bin. Drawing the infinity bin yields
/// kInfinity. Tokens leave through consume_token and come back through
/// return_token or a full refill to the initial snapshot.
class TokenHistogram {
 public:
  TokenHistogram(std::size_t bins, double max_delay);
  TokenHistogram(std::size_t bins, double max_delay, std::vector<std::uint32_t> tokens,
                 RoundingMode rounding = RoundingMode::kNearest);

  std::size_t bins() const noexcept { return tokens_.size(); }
  double max_delay() const noexcept { return max_delay_; }
  RoundingMode rounding() const noexcept { return rounding_; }
  void set_rounding(RoundingMode mode) noexcept { rounding_ = mode; }

  const std::vector<std::uint32_t>& tokens() const noexcept { return tokens_; }
  const std::vector<std::uint32_t>& initial_tokens() const noexcept { return initial_; }

  /// Tokens in the finite bins (K).
  std::uint64_t finite_tokens() const noexcept;
  std::uint32_t infinity_tokens() const noexcept { return tokens_.back(); }
  std::uint64_t total_tokens() const noexcept;

  BinInterval interval(std::size_t bin) const;
  std::size_t bin_index(double delay) const;

  /// k_i / (K + k_n).
  double probability(std::size_t bin) const;

  /// Draws a delay without touching the token counts.
  template <typename Rng>
  double sample(Rng& rng) const;

  /// Removes one token from the delay's bin, falling back to the nearest
  /// non-empty larger bin, then the nearest non-empty smaller bin. An
  /// all-empty histogram is refilled first. Returns true if it refilled.
  bool consume_token(double delay);

  /// Puts a token back into the sampled bin, then consumes one for the
  /// delay that actually elapsed.
  bool return_token(double sampled_delay, double actual_delay);

  void refill() { tokens_ = initial_; }

  /// k_n = P_n/(1-P_n) K, rounded per rounding(); also updates the snapshot.
  void set_infinity_tokens_burst(double infinity_probability);

  /// k_n = (K - mu_L + 1)/(mu_L - 1), rounded, at least 1; also updates the
  /// snapshot.
  void set_infinity_tokens_gap(double mean_burst_length);

  /// Rebuilds a histogram whose current tokens differ from its snapshot.
  static TokenHistogram restore(std::size_t bins, double max_delay,
                                std::vector<std::uint32_t> tokens,
                                std::vector<std::uint32_t> initial_tokens,
                                RoundingMode rounding = RoundingMode::kNearest);

  /// Replaces the current tokens and the refill snapshot.
  void reset_tokens(std::vector<std::uint32_t> tokens);

  friend bool operator==(const TokenHistogram&, const TokenHistogram&) = default;

 private:
  std::size_t pick_bin(std::uint64_t token_rank) const;
  std::uint32_t round_tokens(double value) const;

  double max_delay_;
  std::vector<std::uint32_t> tokens_;
  std::vector<std::uint32_t> initial_;
  RoundingMode rounding_ = RoundingMode::kNearest;
};

/// Counts samples per finite bin; samples >= M land in the last finite bin
/// and the infinity bin starts empty.
TokenHistogram build_histogram(std::size_t bins, double max_delay,
                               std::span<const double> samples);

/// The four histograms of one defense configuration, keyed by the direction
/// of the traffic the owning machine reacts to. From the client's point of
/// view the send machine uses the outgoing pair and the receive machine the
/// incoming pair; the bridge swaps them.
struct HistogramSet {
  TokenHistogram outgoing_burst;
  TokenHistogram outgoing_gap;
  TokenHistogram incoming_burst;
  TokenHistogram incoming_gap;

  friend bool operator==(const HistogramSet&, const HistogramSet&) = default;
};

/// A set where every histogram holds only infinity tokens: the machines
/// never leave the idle state, so no padding is produced.
HistogramSet disabled_histograms(std::size_t bins = 20, double max_delay = 1.0);

/// JSON text with fields n, M, tokens, initial_tokens, rounding.
std::string histogram_set_to_json(const HistogramSet& set);
HistogramSet histogram_set_from_json(const std::string& text);

template <typename Rng>
double TokenHistogram::sample(Rng& rng) const {
  const auto total = total_tokens();
  if (total == 0) {
    detail::throw_empty_histogram();
  }
  std::uniform_int_distribution<std::uint64_t> rank(0, total - 1);
  const auto bin = pick_bin(rank(rng));
  if (bin + 1 == bins()) return kInfinity;
  const auto iv = interval(bin);
  std::uniform_real_distribution<double> within(iv.lower, iv.upper);
  // Guard the rare libstdc++ case where uniform_real_distribution returns b.
  const double d = within(rng);
  return d < iv.upper ? d : iv.lower;
}

}  // namespace wtfpad
