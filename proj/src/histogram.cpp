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

#include "wtfpad/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "wtfpad/error.hpp"

namespace wtfpad {

namespace detail {
void throw_empty_histogram() {
  throw Error(ErrorCode::kEmptyHistogram, "no tokens left in any bin");
}
}  // namespace detail

namespace {

void check_geometry(std::size_t bins, double max_delay) {
  if (bins < 2) throw Error(ErrorCode::kInvalidParams, "need at least 2 bins");
  if (bins > 1000) throw Error(ErrorCode::kInvalidParams, "too many bins");
  if (!(max_delay > 0.0) || !std::isfinite(max_delay)) {
    throw Error(ErrorCode::kInvalidParams, "M must be positive and finite");
  }
}

}  // namespace

std::vector<BinInterval> bin_boundaries(std::size_t bins, double max_delay) {
  check_geometry(bins, max_delay);
  std::vector<BinInterval> out(bins);
  // ldexp keeps the power-of-two scaling exact.
  const int n = static_cast<int>(bins);
  out[0] = {0.0, std::ldexp(max_delay, -(n - 2))};
  for (int i = 1; i + 1 < n; ++i) {
    out[static_cast<std::size_t>(i)] = {std::ldexp(max_delay, -(n - 1 - i)),
                                        std::ldexp(max_delay, -(n - 2 - i))};
  }
  out[bins - 1] = {max_delay, kInfinity};
  return out;
}

TokenHistogram::TokenHistogram(std::size_t bins, double max_delay)
    : TokenHistogram(bins, max_delay, std::vector<std::uint32_t>(bins, 0)) {}

TokenHistogram::TokenHistogram(std::size_t bins, double max_delay,
                               std::vector<std::uint32_t> tokens, RoundingMode rounding)
    : max_delay_(max_delay), tokens_(std::move(tokens)), rounding_(rounding) {
  check_geometry(bins, max_delay);
  if (tokens_.size() != bins) {
    throw Error(ErrorCode::kInvalidParams, "token vector length must equal bin count");
  }
  initial_ = tokens_;
}

std::uint64_t TokenHistogram::finite_tokens() const noexcept {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i + 1 < tokens_.size(); ++i) k += tokens_[i];
  return k;
}

std::uint64_t TokenHistogram::total_tokens() const noexcept {
  return finite_tokens() + tokens_.back();
}

BinInterval TokenHistogram::interval(std::size_t bin) const {
  if (bin >= bins()) throw Error(ErrorCode::kInvalidParams, "bin out of range");
  const int n = static_cast<int>(bins());
  const int i = static_cast<int>(bin);
  if (i == 0) return {0.0, std::ldexp(max_delay_, -(n - 2))};
  if (i == n - 1) return {max_delay_, kInfinity};
  return {std::ldexp(max_delay_, -(n - 1 - i)), std::ldexp(max_delay_, -(n - 2 - i))};
}

std::size_t TokenHistogram::bin_index(double delay) const {
  if (std::isnan(delay) || delay < 0.0) {
    throw Error(ErrorCode::kNegativeTime, "delay must be >= 0");
  }
  const std::size_t n = bins();
  if (delay >= max_delay_) return n - 1;
  // Walk down from the top: bin i's lower edge halves each step.
  for (std::size_t i = n - 2; i > 0; --i) {
    if (delay >= interval(i).lower) return i;
  }
  return 0;
}

double TokenHistogram::probability(std::size_t bin) const {
  const auto total = total_tokens();
  if (total == 0) return 0.0;
  return static_cast<double>(tokens_.at(bin)) / static_cast<double>(total);
}

std::size_t TokenHistogram::pick_bin(std::uint64_t token_rank) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (token_rank < tokens_[i]) return i;
    token_rank -= tokens_[i];
  }
  return tokens_.size() - 1;
}

bool TokenHistogram::consume_token(double delay) {
  const std::size_t target = std::isinf(delay) && delay > 0 ? bins() - 1 : bin_index(delay);
  bool refilled = false;
  if (total_tokens() == 0) {
    refill();
    refilled = true;
    if (total_tokens() == 0) detail::throw_empty_histogram();
  }
  if (tokens_[target] > 0) {
    --tokens_[target];
    return refilled;
  }
  for (std::size_t i = target + 1; i < tokens_.size(); ++i) {
    if (tokens_[i] > 0) {
      --tokens_[i];
      return refilled;
    }
  }
  for (std::size_t i = target; i-- > 0;) {
    if (tokens_[i] > 0) {
      --tokens_[i];
      return refilled;
    }
  }
  return refilled;  // unreachable: total_tokens() > 0
}

bool TokenHistogram::return_token(double sampled_delay, double actual_delay) {
  const std::size_t sampled =
      std::isinf(sampled_delay) && sampled_delay > 0 ? bins() - 1 : bin_index(sampled_delay);
  ++tokens_[sampled];
  return consume_token(actual_delay);
}

std::uint32_t TokenHistogram::round_tokens(double value) const {
  // A tiny slack keeps exact products like 0.25 * 300 from ceiling upward.
  const double r = rounding_ == RoundingMode::kCeiling ? std::ceil(value - 1e-9)
                                                       : std::round(value);
  return static_cast<std::uint32_t>(std::max(0.0, r));
}

void TokenHistogram::set_infinity_tokens_burst(double infinity_probability) {
  if (!(infinity_probability >= 0.0 && infinity_probability < 1.0)) {
    throw Error(ErrorCode::kInvalidProbability, "P_n must be in [0, 1)");
  }
  const auto k = finite_tokens();
  if (k < 1) throw Error(ErrorCode::kInvalidParams, "histogram has no finite tokens");
  tokens_.back() = round_tokens(infinity_probability / (1.0 - infinity_probability) *
                                static_cast<double>(k));
  initial_ = tokens_;
}

void TokenHistogram::set_infinity_tokens_gap(double mean_burst_length) {
  const auto k = static_cast<double>(finite_tokens());
  if (!(mean_burst_length > 1.0) || !(k >= mean_burst_length)) {
    throw Error(ErrorCode::kInvalidMeanLength, "need mu_L > 1 and K >= mu_L");
  }
  const double kn = (k - mean_burst_length + 1.0) / (mean_burst_length - 1.0);
  tokens_.back() = std::max<std::uint32_t>(1, round_tokens(kn));
  initial_ = tokens_;
}

TokenHistogram TokenHistogram::restore(std::size_t bins, double max_delay,
                                       std::vector<std::uint32_t> tokens,
                                       std::vector<std::uint32_t> initial_tokens,
                                       RoundingMode rounding) {
  TokenHistogram h(bins, max_delay, std::move(initial_tokens), rounding);
  if (tokens.size() != bins) {
    throw Error(ErrorCode::kInvalidParams, "token vector length must equal bin count");
  }
  h.tokens_ = std::move(tokens);
  return h;
}

void TokenHistogram::reset_tokens(std::vector<std::uint32_t> tokens) {
  if (tokens.size() != bins()) {
    throw Error(ErrorCode::kInvalidParams, "token vector length must equal bin count");
  }
  tokens_ = std::move(tokens);
  initial_ = tokens_;
}

TokenHistogram build_histogram(std::size_t bins, double max_delay,
                               std::span<const double> samples) {
  check_geometry(bins, max_delay);
  if (samples.empty()) throw Error(ErrorCode::kEmptySamples, "no samples");
  TokenHistogram shape(bins, max_delay);
  std::vector<std::uint32_t> tokens(bins, 0);
  for (double s : samples) {
    if (std::isnan(s) || s < 0.0) throw Error(ErrorCode::kInvalidParams, "negative sample");
    const auto i = std::min(shape.bin_index(std::min(s, max_delay)), bins - 2);
    ++tokens[i];
  }
  return TokenHistogram(bins, max_delay, std::move(tokens));
}

HistogramSet disabled_histograms(std::size_t bins, double max_delay) {
  std::vector<std::uint32_t> tokens(bins, 0);
  tokens.back() = 1;
  const TokenHistogram h(bins, max_delay, tokens);
  return {h, h, h, h};
}

namespace {

using nlohmann::json;

json to_json(const TokenHistogram& h) {
  return json{{"n", h.bins()},
              {"M", h.max_delay()},
              {"tokens", h.tokens()},
              {"initial_tokens", h.initial_tokens()},
              {"rounding", h.rounding() == RoundingMode::kCeiling ? "ceiling" : "nearest"}};
}

TokenHistogram histogram_from_json(const json& j) {
  const auto n = j.at("n").get<std::size_t>();
  const auto m = j.at("M").get<double>();
  const auto rounding = j.value("rounding", std::string("nearest"));
  if (rounding != "nearest" && rounding != "ceiling") {
    throw Error(ErrorCode::kInvalidParams, "unknown rounding mode '" + rounding + "'");
  }
  const auto mode = rounding == "ceiling" ? RoundingMode::kCeiling : RoundingMode::kNearest;
  return TokenHistogram::restore(n, m, j.at("tokens").get<std::vector<std::uint32_t>>(),
                                 j.at("initial_tokens").get<std::vector<std::uint32_t>>(), mode);
}

}  // namespace

std::string histogram_set_to_json(const HistogramSet& set) {
  json j{{"outgoing_burst", to_json(set.outgoing_burst)},
         {"outgoing_gap", to_json(set.outgoing_gap)},
         {"incoming_burst", to_json(set.incoming_burst)},
         {"incoming_gap", to_json(set.incoming_gap)}};
  return j.dump(2) + "\n";
}

HistogramSet histogram_set_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    return {histogram_from_json(j.at("outgoing_burst")), histogram_from_json(j.at("outgoing_gap")),
            histogram_from_json(j.at("incoming_burst")), histogram_from_json(j.at("incoming_gap"))};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidParams, std::string("histogram JSON: ") + e.what());
  }
}

}  // namespace wtfpad
