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

#include "vidal/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "vidal/error.hpp"

namespace vidal {

double percentile(std::span<const double> values, double p) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "percentile of an empty set");
  if (!(p > 0.0 && p <= 100.0)) {
    fail(ErrorCode::kInvalidArgument, "percentile must lie in (0, 100]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double calibrate_threshold(const Model& oracle_model,
                           const Eigen::MatrixXd& oracle_test_features,
                           double pct) {
  if (oracle_test_features.rows() == 0) {
    fail(ErrorCode::kInvalidArgument, "calibrate_threshold: empty oracle test pool");
  }
  std::vector<double> entropies;
  entropies.reserve(static_cast<std::size_t>(oracle_test_features.rows()));
  for (Eigen::Index i = 0; i < oracle_test_features.rows(); ++i) {
    entropies.push_back(entropy(predict_proba(oracle_model, oracle_test_features.row(i).transpose())));
  }
  return percentile(entropies, pct);
}

OracleVerdict oracle_decide(const OracleConfig& cfg, const Eigen::VectorXd& pooled) {
  const Eigen::VectorXd p = predict_proba(cfg.model, pooled);
  OracleVerdict v;
  v.oracle_entropy = entropy(p);
  if (v.oracle_entropy > cfg.tau) {
    v.outcome = OracleOutcome::kAbstained;
  } else {
    v.outcome = OracleOutcome::kLabeled;
    v.label = argmax(p);
  }
  return v;
}

OracleVerdict query_oracle(const OracleConfig& cfg, const VideoSample& video,
                           const FrameSubset& frames) {
  return oracle_decide(cfg, pool_frames(video, frames.indices));
}

}  // namespace vidal
