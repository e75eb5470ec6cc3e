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

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wtfpad/corpus.hpp"
#include "wtfpad/trace.hpp"

namespace wtfpad {

using FeatureVector = Eigen::VectorXd;
/// One instance per row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureConfig {
  /// Same-direction packets whose two-packet bandwidth reaches this value
  /// (bytes per second) belong to the same burst.
  double burst_bandwidth = 75'000.0;
  std::size_t sign_prefix = 30;
};

/// Layout: cells out/in, bytes out/in, duration, per direction (burst count,
/// mean burst length, max burst length), direction signs of the first
/// `sign_prefix` cells (+1 out, -1 in, 0 past the end), inter-arrival deciles
/// 10%..90%. Packet kinds are ignored: the observer cannot tell them apart.
std::size_t feature_dimension(const FeatureConfig& config = {});
FeatureVector extract_features(const Trace& trace, const FeatureConfig& config = {});
FeatureMatrix extract_features(const std::vector<Trace>& traces, const FeatureConfig& config = {});

/// Interns string labels as dense ids in first-appearance order.
class LabelIndex {
 public:
  int intern(const std::string& label);
  int id(const std::string& label) const;
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
};

struct VoteTally {
  int label = -1;  // plurality label among the k nearest
  int votes = 0;
};

/// k-NN over min-max normalized features (fit on the training rows) with L1
/// distance. Plurality ties go to the label of the closer neighbor.
class KnnClassifier {
 public:
  KnnClassifier(FeatureMatrix train, std::vector<int> labels);

  std::size_t size() const noexcept { return labels_.size(); }

  /// Training-row indices of the k nearest, closest first.
  std::vector<std::size_t> nearest(const FeatureVector& x, std::size_t k) const;
  VoteTally tally(const FeatureVector& x, std::size_t k) const;

  /// Plurality label if it has at least `vote_threshold` votes, else reject.
  std::optional<int> classify(const FeatureVector& x, std::size_t k,
                              std::size_t vote_threshold = 1) const;

 private:
  Eigen::RowVectorXd normalize(const FeatureVector& x) const;

  FeatureMatrix train_;  // normalized
  std::vector<int> labels_;
  Eigen::RowVectorXd min_;
  Eigen::RowVectorXd scale_;
};

struct CurvePoint {
  double x;
  double y;
};

struct EvalReport {
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::vector<CurvePoint> roc_points;   // (fpr, tpr)
  std::vector<CurvePoint> proc_points;  // (recall, precision)
  double auc = 0.0;
  double proc_auc = 0.0;
  double random_baseline = 0.0;
  std::size_t world_size = 0;
};

/// Harmonic mean; 0 when either side is 0.
double f1_score(double precision, double recall) noexcept;

/// Trapezoid area over points already sorted by x.
double trapezoid_auc(const std::vector<CurvePoint>& points) noexcept;

/// Fold id per instance: instances of each label are shuffled and dealt
/// round-robin. Throws InsufficientInstances when a label has fewer than
/// `folds` instances (labels listed in `unchecked` are exempt).
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t folds,
                                          std::uint64_t seed,
                                          const std::vector<int>& unchecked = {});

/// Out-of-fold k-NN tallies for every instance.
std::vector<VoteTally> cross_validated_tallies(const FeatureMatrix& features,
                                               const std::vector<int>& labels, std::size_t k,
                                               std::size_t folds, std::uint64_t seed,
                                               const std::vector<int>& unchecked = {});

struct ClosedWorldOptions {
  std::size_t k = 5;
  std::size_t folds = 10;
  FeatureConfig features;
};

/// Stratified cross-validated accuracy (reported as tpr and accuracy).
EvalReport closed_world_eval(const Corpus& corpus, const ClosedWorldOptions& options,
                             std::uint64_t seed);

/// Monitored = first half of the labels in sorted order. The
/// vote threshold 1..k is the discriminant; any monitored prediction of a
/// monitored instance is a true positive.
EvalReport roc_binarized(const Corpus& corpus, const ClosedWorldOptions& options,
                         std::uint64_t seed);

struct ProcCurve {
  std::vector<CurvePoint> points;
  double auc = 0.0;
  double random_baseline = 0.0;
};

/// Precision-recall curve over score thresholds max_score..1, where an
/// instance is predicted positive when its score reaches the threshold.
/// The curve starts at recall 0 and ends at (1, positives/total).
ProcCurve proc_curve(const std::vector<int>& scores, const std::vector<bool>& positive,
                     int max_score);

struct OpenWorldOptions {
  std::size_t k = 4;
  std::size_t folds = 10;
  std::optional<std::size_t> vote_threshold;  // default: k (all neighbors agree)
  FeatureConfig features;
};

/// One report per world size: the first `size` background traces join the
/// monitored corpus as a single non-monitored class. Rejected predictions
/// count as non-monitored.
std::vector<EvalReport> open_world_eval(const Corpus& monitored,
                                        const std::vector<Trace>& background,
                                        const std::vector<std::size_t>& world_sizes,
                                        const OpenWorldOptions& options, std::uint64_t seed);

/// The same traces with labels shuffled among them.
Corpus permute_labels(const Corpus& corpus, std::uint64_t seed);

std::string curve_csv(const std::vector<CurvePoint>& points);

}  // namespace wtfpad
