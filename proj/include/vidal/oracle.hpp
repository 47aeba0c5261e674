// Copyright 2026 The Vidal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "vidal/classifier.hpp"
#include "vidal/dataset.hpp"
#include "vidal/frame_select.hpp"

namespace vidal {

struct OracleConfig {
  Model model;
  double tau = 0.0;
  double percentile = 50.0;
};

enum class OracleOutcome { kLabeled, kAbstained };

struct OracleVerdict {
  OracleOutcome outcome = OracleOutcome::kAbstained;
  std::optional<int> label;
  double oracle_entropy = 0.0;
  /// Filled in by the harness from ground truth; reporting only.
  std::optional<bool> correct;

  bool labeled() const { return outcome == OracleOutcome::kLabeled; }
};

/// Percentile with linear interpolation between closest ranks
/// (rank = p / 100 * (n - 1) on the sorted values).
double percentile(std::span<const double> values, double p);

/// Entropy threshold at `percentile` of the oracle's entropies on
/// `oracle_test_features` (one pooled video per row).
double calibrate_threshold(const Model& oracle_model,
                           const Eigen::MatrixXd& oracle_test_features,
                           double percentile);

/// Abstain when the entropy of the subset-pooled prediction exceeds tau;
/// otherwise return the argmax label.
OracleVerdict query_oracle(const OracleConfig& cfg, const VideoSample& video,
                           const FrameSubset& frames);

/// The decision rule on an already pooled feature vector.
OracleVerdict oracle_decide(const OracleConfig& cfg, const Eigen::VectorXd& pooled);

}  // namespace vidal
