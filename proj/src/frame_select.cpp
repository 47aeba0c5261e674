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

#include "vidal/frame_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vidal/error.hpp"
#include "vidal/random.hpp"

namespace vidal {

namespace {

void require_frames(const Eigen::MatrixXd& frames, std::size_t k) {
  if (frames.rows() == 0 || frames.cols() == 0) {
    fail(ErrorCode::kInvalidArgument, "empty frame matrix");
  }
  if (k < 1) fail(ErrorCode::kInvalidArgument, "frame budget k must be >= 1");
}

double distance(const Eigen::MatrixXd& frames, Eigen::Index i,
                const Eigen::Ref<const Eigen::RowVectorXd>& point) {
  return (frames.row(i) - point).norm();
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

double kcenter_radius(const Eigen::MatrixXd& frames,
                      std::span<const std::size_t> centers) {
  if (centers.empty()) fail(ErrorCode::kInvalidArgument, "kcenter_radius: empty center set");
  for (auto c : centers) {
    if (c >= static_cast<std::size_t>(frames.rows())) {
      fail(ErrorCode::kOutOfRange, "kcenter_radius: center index out of range");
    }
  }
  double radius = 0.0;
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (auto c : centers) {
      nearest = std::min(nearest, distance(frames, i, frames.row(static_cast<Eigen::Index>(c))));
    }
    radius = std::max(radius, nearest);
  }
  return radius;
}

FrameSubset kcenter_greedy(const Eigen::MatrixXd& frames, std::size_t k) {
  require_frames(frames, k);
  const auto n = static_cast<std::size_t>(frames.rows());
  if (k >= n) return FrameSubset{all_indices(n), 0.0};

  const Eigen::RowVectorXd mean = frames.colwise().mean();
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = distance(frames, static_cast<Eigen::Index>(i), mean);
  }

  std::vector<bool> chosen(n, false);
  std::vector<std::size_t> centers;
  centers.reserve(k);
  while (true) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      if (pick == n || nearest[i] > nearest[pick]) pick = i;
    }
    chosen[pick] = true;
    centers.push_back(pick);
    // The first pass measured distance to the mean; reset before folding in
    // distances to the first real center.
    if (centers.size() == 1) std::fill(nearest.begin(), nearest.end(),
                                       std::numeric_limits<double>::infinity());
    const Eigen::RowVectorXd c = frames.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], distance(frames, static_cast<Eigen::Index>(i), c));
    }
    if (centers.size() == k) break;
  }

  FrameSubset out;
  out.radius = *std::max_element(nearest.begin(), nearest.end());
  std::sort(centers.begin(), centers.end());
  out.indices = std::move(centers);
  return out;
}

FrameSubset kmeans_frames(const Eigen::MatrixXd& frames, std::size_t k,
                          std::uint64_t seed, int max_iters) {
  require_frames(frames, k);
  const auto n = static_cast<std::size_t>(frames.rows());
  if (k >= n) return FrameSubset{all_indices(n), 0.0};

  // Seeded first centroid, then farthest-point additions.
  Rng rng(seed);
  std::vector<std::size_t> init{uniform_index(rng, n)};
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (init.size() < k) {
    const Eigen::RowVectorXd last = frames.row(static_cast<Eigen::Index>(init.back()));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], distance(frames, static_cast<Eigen::Index>(i), last));
    }
    std::size_t pick = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (nearest[i] > nearest[pick]) pick = i;
    }
    init.push_back(pick);
  }

  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd centroids(kk, frames.cols());
  for (Eigen::Index c = 0; c < kk; ++c) {
    centroids.row(c) = frames.row(static_cast<Eigen::Index>(init[static_cast<std::size_t>(c)]));
  }

  std::vector<std::size_t> assign(n, k);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double d = (frames.row(static_cast<Eigen::Index>(i)) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::size_t>(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, frames.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(assign[i])) += frames.row(static_cast<Eigen::Index>(i));
      ++counts[assign[i]];
    }
    // Empty clusters keep their previous centroid.
    for (Eigen::Index c = 0; c < kk; ++c) {
      const auto count = counts[static_cast<std::size_t>(c)];
      if (count > 0) centroids.row(c) = sums.row(c) / static_cast<double>(count);
    }
  }

  std::vector<bool> used(n, false);
  std::vector<std::size_t> picks;
  picks.reserve(k);
  for (Eigen::Index c = 0; c < kk; ++c) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double d = distance(frames, static_cast<Eigen::Index>(i), centroids.row(c));
      if (best == n || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    used[best] = true;
    picks.push_back(best);
  }
  std::sort(picks.begin(), picks.end());
  FrameSubset out;
  out.radius = kcenter_radius(frames, picks);
  out.indices = std::move(picks);
  return out;
}

FrameSubset random_frames(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "random_frames: no frames");
  if (k < 1) fail(ErrorCode::kInvalidArgument, "frame budget k must be >= 1");
  Rng rng(seed);
  auto picks = sample_without_replacement(n, std::min(k, n), rng);
  std::sort(picks.begin(), picks.end());
  return FrameSubset{std::move(picks), 0.0};
}

FrameSubset random_frames(const Eigen::MatrixXd& frames, std::size_t k,
                          std::uint64_t seed) {
  require_frames(frames, k);
  FrameSubset out = random_frames(static_cast<std::size_t>(frames.rows()), k, seed);
  out.radius = kcenter_radius(frames, out.indices);
  return out;
}

}  // namespace vidal
