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
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vidal {

/// Chosen frames of one video (sorted) and their k-center radius.
struct FrameSubset {
  std::vector<std::size_t> indices;
  double radius = 0.0;
};

/// Max over all frames of the Euclidean distance to the nearest frame in `centers`.
double kcenter_radius(const Eigen::MatrixXd& frames,
                      std::span<const std::size_t> centers);

/// Greedy farthest-point k-center. The first center is the frame farthest
/// from the mean frame; each later center is the frame whose distance to its
/// nearest chosen center is largest. Ties go to the lowest index. Returns all
/// frames when k >= n.
FrameSubset kcenter_greedy(const Eigen::MatrixXd& frames, std::size_t k);

/// Lloyd's k-means with a seeded farthest-point initialization; each centroid
/// is then mapped to its nearest unused frame.
FrameSubset kmeans_frames(const Eigen::MatrixXd& frames, std::size_t k,
                          std::uint64_t seed, int max_iters = 100);

/// Uniform subset without replacement. Radius is left at 0; use
/// kcenter_radius when it is needed.
FrameSubset random_frames(std::size_t n, std::size_t k, std::uint64_t seed);

/// Same as random_frames but with the radius filled in.
FrameSubset random_frames(const Eigen::MatrixXd& frames, std::size_t k,
                          std::uint64_t seed);

}  // namespace vidal
