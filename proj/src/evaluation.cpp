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

#include "wtfpad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "wtfpad/error.hpp"
#include "wtfpad/parallel.hpp"

namespace wtfpad {

namespace {

constexpr std::size_t kScalarFeatures = 5;
constexpr std::size_t kBurstFeatures = 6;
constexpr std::size_t kDeciles = 9;

struct BurstStats {
  double count = 0.0;
  double mean_length = 0.0;
  double max_length = 0.0;
};

BurstStats bursts(const std::vector<PacketEvent>& events, double threshold) {
  BurstStats s;
  if (events.empty()) return s;
  std::vector<double> lengths;
  double current = 1.0;
  for (std::size_t i = 1; i < events.size(); ++i) {
    const double span = events[i].time - events[i - 1].time;
    const double bytes = static_cast<double>(events[i - 1].size + events[i].size);
    if (span <= 0.0 || bytes / span >= threshold) {
      current += 1.0;
    } else {
      lengths.push_back(current);
      current = 1.0;
    }
  }
  lengths.push_back(current);
  s.count = static_cast<double>(lengths.size());
  s.mean_length = std::accumulate(lengths.begin(), lengths.end(), 0.0) / s.count;
  s.max_length = *std::max_element(lengths.begin(), lengths.end());
  return s;
}

}  // namespace

std::size_t feature_dimension(const FeatureConfig& config) {
  return kScalarFeatures + kBurstFeatures + config.sign_prefix + kDeciles;
}

FeatureVector extract_features(const Trace& trace, const FeatureConfig& config) {
  if (trace.empty()) throw Error(ErrorCode::kEmptyTrace, trace.label());
  FeatureVector f = FeatureVector::Zero(static_cast<Eigen::Index>(feature_dimension(config)));
  Eigen::Index at = 0;

  const auto out = trace.filtered(DirectionFilter::kOutgoing);
  const auto in = trace.filtered(DirectionFilter::kIncoming);
  auto bytes = [](const std::vector<PacketEvent>& ev) {
    double b = 0.0;
    for (const auto& e : ev) b += e.size;
    return b;
  };
  f[at++] = static_cast<double>(out.size());
  f[at++] = static_cast<double>(in.size());
  f[at++] = bytes(out);
  f[at++] = bytes(in);
  f[at++] = trace.events().back().time - trace.events().front().time;

  for (const auto* dir : {&out, &in}) {
    const auto b = bursts(*dir, config.burst_bandwidth);
    f[at++] = b.count;
    f[at++] = b.mean_length;
    f[at++] = b.max_length;
  }

  for (std::size_t i = 0; i < config.sign_prefix; ++i, ++at) {
    if (i < trace.size()) f[at] = trace[i].direction == Direction::kOutgoing ? 1.0 : -1.0;
  }

  if (trace.size() >= 2) {
    std::vector<double> gaps = interarrival_times(trace);
    std::sort(gaps.begin(), gaps.end());
    for (std::size_t d = 1; d <= kDeciles; ++d) {
      const double pos = static_cast<double>(d) / 10.0 * static_cast<double>(gaps.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, gaps.size() - 1);
      const double w = pos - static_cast<double>(lo);
      f[at++] = gaps[lo] * (1.0 - w) + gaps[hi] * w;
    }
  }
  return f;
}

FeatureMatrix extract_features(const std::vector<Trace>& traces, const FeatureConfig& config) {
  FeatureMatrix m(static_cast<Eigen::Index>(traces.size()),
                  static_cast<Eigen::Index>(feature_dimension(config)));
  parallel_for(traces.size(), [&](std::size_t i) {
    m.row(static_cast<Eigen::Index>(i)) = extract_features(traces[i], config).transpose();
  });
  return m;
}

int LabelIndex::intern(const std::string& label) {
  const auto it = std::find(names_.begin(), names_.end(), label);
  if (it != names_.end()) return static_cast<int>(it - names_.begin());
  names_.push_back(label);
  return static_cast<int>(names_.size() - 1);
}

int LabelIndex::id(const std::string& label) const {
  const auto it = std::find(names_.begin(), names_.end(), label);
  if (it == names_.end()) throw Error(ErrorCode::kInvalidParams, "unknown label " + label);
  return static_cast<int>(it - names_.begin());
}

KnnClassifier::KnnClassifier(FeatureMatrix train, std::vector<int> labels)
    : train_(std::move(train)), labels_(std::move(labels)) {
  if (train_.rows() == 0 || static_cast<std::size_t>(train_.rows()) != labels_.size()) {
    throw Error(ErrorCode::kInvalidParams, "training rows and labels disagree");
  }
  min_ = train_.colwise().minCoeff();
  const Eigen::RowVectorXd range = train_.colwise().maxCoeff() - min_;
  // Constant columns carry no information; map them to 0.
  scale_ = (range.array() > 0.0).select(range.array().inverse(), 0.0);
  train_ = (train_.rowwise() - min_).array().rowwise() * scale_.array();
}

Eigen::RowVectorXd KnnClassifier::normalize(const FeatureVector& x) const {
  if (x.size() != train_.cols()) throw Error(ErrorCode::kInvalidParams, "feature size mismatch");
  return (x.transpose() - min_).array() * scale_.array();
}

std::vector<std::size_t> KnnClassifier::nearest(const FeatureVector& x, std::size_t k) const {
  if (k == 0 || k > size()) {
    throw Error(ErrorCode::kInvalidK, "k must be in [1, " + std::to_string(size()) + "]");
  }
  const Eigen::RowVectorXd q = normalize(x);
  const Eigen::VectorXd dist = (train_.rowwise() - q).cwiseAbs().rowwise().sum();
  std::vector<std::size_t> idx(size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto da = dist[static_cast<Eigen::Index>(a)];
                      const auto db = dist[static_cast<Eigen::Index>(b)];
                      return da < db || (da == db && a < b);
                    });
  idx.resize(k);
  return idx;
}

VoteTally KnnClassifier::tally(const FeatureVector& x, std::size_t k) const {
  const auto near = nearest(x, k);
  // (label, votes) in order of first (closest) appearance.
  std::vector<std::pair<int, int>> counts;
  for (auto i : near) {
    const int l = labels_[i];
    auto it = std::find_if(counts.begin(), counts.end(), [l](const auto& c) { return c.first == l; });
    if (it == counts.end()) {
      counts.emplace_back(l, 1);
    } else {
      ++it->second;
    }
  }
  VoteTally best;
  for (const auto& [l, v] : counts) {
    if (v > best.votes) best = {l, v};
  }
  return best;
}

std::optional<int> KnnClassifier::classify(const FeatureVector& x, std::size_t k,
                                           std::size_t vote_threshold) const {
  if (vote_threshold < 1 || vote_threshold > k) {
    throw Error(ErrorCode::kInvalidK, "vote threshold must be in [1, k]");
  }
  const auto t = tally(x, k);
  if (static_cast<std::size_t>(t.votes) < vote_threshold) return std::nullopt;
  return t.label;
}

double f1_score(double precision, double recall) noexcept {
  if (precision <= 0.0 || recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double trapezoid_auc(const std::vector<CurvePoint>& points) noexcept {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].x - points[i - 1].x) * 0.5 * (points[i].y + points[i - 1].y);
  }
  return area;
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds,
                                          std::uint64_t seed, const std::vector<int>& unchecked) {
  if (folds < 2) throw Error(ErrorCode::kInvalidParams, "need at least 2 folds");
  std::vector<int> distinct(labels);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);
  for (int l : distinct) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == l) members.push_back(i);
    }
    const bool exempt = std::find(unchecked.begin(), unchecked.end(), l) != unchecked.end();
    if (!exempt && members.size() < folds) {
      throw Error(ErrorCode::kInsufficientInstances,
                  "label has " + std::to_string(members.size()) + " instances, need " +
                      std::to_string(folds));
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = j % folds;
  }
  return fold;
}

std::vector<VoteTally> cross_validated_tallies(const FeatureMatrix& features,
                                               const std::vector<int>& labels, std::size_t k,
                                               std::size_t folds, std::uint64_t seed,
                                               const std::vector<int>& unchecked) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::kInvalidParams, "features and labels disagree");
  }
  const auto fold = stratified_folds(labels, folds, seed, unchecked);
  std::vector<VoteTally> out(labels.size());
  parallel_for(folds, [&](std::size_t f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (fold[i] == f ? test_rows : train_rows).push_back(i);
    }
    if (test_rows.empty()) return;
    FeatureMatrix train(static_cast<Eigen::Index>(train_rows.size()), features.cols());
    std::vector<int> train_labels;
    train_labels.reserve(train_rows.size());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      train.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(train_rows[r]));
      train_labels.push_back(labels[train_rows[r]]);
    }
    const KnnClassifier knn(std::move(train), std::move(train_labels));
    for (auto i : test_rows) {
      out[i] = knn.tally(features.row(static_cast<Eigen::Index>(i)).transpose(), k);
    }
  });
  return out;
}

namespace {

std::vector<int> intern_labels(const std::vector<Trace>& traces, LabelIndex& index) {
  std::vector<int> ids;
  ids.reserve(traces.size());
  for (const auto& t : traces) ids.push_back(index.intern(t.label()));
  return ids;
}

std::vector<CurvePoint> roc_from(const std::vector<int>& scores, const std::vector<bool>& positive,
                                 int max_score) {
  const auto p = std::count(positive.begin(), positive.end(), true);
  const auto n = static_cast<std::ptrdiff_t>(positive.size()) - p;
  std::vector<CurvePoint> pts{{0.0, 0.0}, {1.0, 1.0}};
  for (int tau = 1; tau <= max_score; ++tau) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= tau) (positive[i] ? tp : fp) += 1.0;
    }
    pts.push_back({n > 0 ? fp / static_cast<double>(n) : 0.0,
                   p > 0 ? tp / static_cast<double>(p) : 0.0});
  }
  std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return pts;
}

}  // namespace

EvalReport closed_world_eval(const Corpus& corpus, const ClosedWorldOptions& options,
                             std::uint64_t seed) {
  LabelIndex index;
  const auto labels = intern_labels(corpus.traces(), index);
  const auto features = extract_features(corpus.traces(), options.features);
  const auto tallies =
      cross_validated_tallies(features, labels, options.k, options.folds, seed);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += tallies[i].label == labels[i];
  EvalReport r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  r.tpr = r.accuracy;
  r.precision = r.accuracy;  // threshold 1 never rejects
  r.fpr = 1.0 - r.accuracy;
  r.f1 = f1_score(r.precision, r.tpr);
  r.world_size = index.size();
  return r;
}

EvalReport roc_binarized(const Corpus& corpus, const ClosedWorldOptions& options,
                         std::uint64_t seed) {
  LabelIndex index;
  const auto labels = intern_labels(corpus.traces(), index);
  if (index.size() < 4 || index.size() % 2 != 0) {
    throw Error(ErrorCode::kInvalidParams, "ROC binarization needs an even label count >= 4");
  }
  // Halves by sorted name, so the split does not depend on trace order.
  std::vector<std::string> names;
  for (std::size_t i = 0; i < index.size(); ++i) names.push_back(index.name(static_cast<int>(i)));
  std::sort(names.begin(), names.end());
  std::vector<bool> is_monitored(index.size(), false);
  for (std::size_t i = 0; i < names.size() / 2; ++i) {
    is_monitored[static_cast<std::size_t>(index.id(names[i]))] = true;
  }
  const auto features = extract_features(corpus.traces(), options.features);
  const auto tallies = cross_validated_tallies(features, labels, options.k, options.folds, seed);

  std::vector<int> scores(labels.size());
  std::vector<bool> positive(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    positive[i] = is_monitored[static_cast<std::size_t>(labels[i])];
    scores[i] = is_monitored[static_cast<std::size_t>(tallies[i].label)] ? tallies[i].votes : 0;
  }
  EvalReport r;
  r.roc_points = roc_from(scores, positive, static_cast<int>(options.k));
  r.auc = trapezoid_auc(r.roc_points);
  const auto pc = proc_curve(scores, positive, static_cast<int>(options.k));
  r.proc_points = pc.points;
  r.proc_auc = pc.auc;
  r.random_baseline = pc.random_baseline;
  // Operating point at the default threshold of 1.
  double tp = 0, fp = 0;
  const auto p = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const auto n = static_cast<double>(positive.size()) - p;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= 1) (positive[i] ? tp : fp) += 1.0;
  }
  r.tpr = tp / p;
  r.fpr = fp / n;
  r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  r.f1 = f1_score(r.precision, r.tpr);
  r.accuracy = (tp + (n - fp)) / (p + n);
  r.world_size = index.size();
  return r;
}

ProcCurve proc_curve(const std::vector<int>& scores, const std::vector<bool>& positive,
                     int max_score) {
  if (scores.size() != positive.size()) {
    throw Error(ErrorCode::kInvalidParams, "scores and labels disagree");
  }
  const auto p = std::count(positive.begin(), positive.end(), true);
  if (p == 0) throw Error(ErrorCode::kNoPositives, "P-ROC needs positive instances");
  ProcCurve c;
  c.random_baseline = static_cast<double>(p) / static_cast<double>(positive.size());
  std::vector<CurvePoint> pts;
  for (int tau = max_score; tau >= 1; --tau) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= tau) (positive[i] ? tp : fp) += 1.0;
    }
    if (tp + fp == 0) continue;  // precision undefined
    pts.push_back({tp / static_cast<double>(p), tp / (tp + fp)});
  }
  std::stable_sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.x < b.x || (a.x == b.x && a.y > b.y);
  });
  c.points.push_back({0.0, pts.empty() ? c.random_baseline : pts.front().y});
  c.points.insert(c.points.end(), pts.begin(), pts.end());
  c.points.push_back({1.0, c.random_baseline});
  c.auc = trapezoid_auc(c.points);
  return c;
}

std::vector<EvalReport> open_world_eval(const Corpus& monitored,
                                        const std::vector<Trace>& background,
                                        const std::vector<std::size_t>& world_sizes,
                                        const OpenWorldOptions& options, std::uint64_t seed) {
  const std::size_t threshold = options.vote_threshold.value_or(options.k);
  if (threshold < 1 || threshold > options.k) {
    throw Error(ErrorCode::kInvalidK, "vote threshold must be in [1, k]");
  }
  LabelIndex index;
  const auto mon_labels = intern_labels(monitored.traces(), index);
  const int background_id = static_cast<int>(index.size());
  const auto mon_features = extract_features(monitored.traces(), options.features);

  std::size_t needed = 0;
  for (auto w : world_sizes) needed = std::max(needed, w);
  if (background.size() < needed) {
    throw Error(ErrorCode::kInsufficientBackground,
                "have " + std::to_string(background.size()) + " background traces, need " +
                    std::to_string(needed));
  }
  const std::vector<Trace> bg(background.begin(),
                              background.begin() + static_cast<std::ptrdiff_t>(needed));
  const auto bg_features = extract_features(bg, options.features);

  std::vector<EvalReport> reports;
  for (auto w : world_sizes) {
    const auto total = mon_labels.size() + w;
    FeatureMatrix features(static_cast<Eigen::Index>(total), mon_features.cols());
    features.topRows(mon_features.rows()) = mon_features;
    if (w > 0) features.bottomRows(static_cast<Eigen::Index>(w)) = bg_features.topRows(static_cast<Eigen::Index>(w));
    std::vector<int> labels = mon_labels;
    labels.resize(total, background_id);

    const auto tallies = cross_validated_tallies(features, labels, options.k, options.folds, seed,
                                                 {background_id});
    double tp = 0, wrong_monitored = 0, bg_as_monitored = 0, tn = 0;
    std::vector<int> scores(total);
    std::vector<bool> positive(total);
    for (std::size_t i = 0; i < total; ++i) {
      const bool is_monitored = labels[i] != background_id;
      const auto& t = tallies[i];
      const bool predicts_monitored =
          t.label != background_id && static_cast<std::size_t>(t.votes) >= threshold;
      positive[i] = is_monitored;
      scores[i] = t.label != background_id ? t.votes : 0;
      if (is_monitored) {
        if (predicts_monitored) (t.label == labels[i] ? tp : wrong_monitored) += 1.0;
      } else {
        (predicts_monitored ? bg_as_monitored : tn) += 1.0;
      }
    }
    EvalReport r;
    r.world_size = w;
    const auto mon = static_cast<double>(mon_labels.size());
    const auto predicted_monitored = tp + wrong_monitored + bg_as_monitored;
    r.tpr = tp / mon;
    r.fpr = w > 0 ? bg_as_monitored / static_cast<double>(w) : 0.0;
    r.precision = predicted_monitored > 0 ? tp / predicted_monitored : 0.0;
    r.f1 = f1_score(r.precision, r.tpr);
    r.accuracy = (tp + tn) / static_cast<double>(total);
    r.roc_points = roc_from(scores, positive, static_cast<int>(options.k));
    r.auc = trapezoid_auc(r.roc_points);
    const auto pc = proc_curve(scores, positive, static_cast<int>(options.k));
    r.proc_points = pc.points;
    r.proc_auc = pc.auc;
    r.random_baseline = pc.random_baseline;
    reports.push_back(std::move(r));
  }
  return reports;
}

Corpus permute_labels(const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::string> labels;
  for (const auto& t : corpus) labels.push_back(t.label());
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  std::vector<Trace> traces;
  traces.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    traces.emplace_back(corpus[i].events(), labels[i]);
  }
  return Corpus(std::move(traces), corpus.metadata());
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  std::ostringstream os;
  os.precision(10);
  os << "x,y\n";
  for (const auto& p : points) os << p.x << "," << p.y << "\n";
  return os.str();
}

}  // namespace wtfpad
