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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vidal {

/// One video: per-frame embeddings (rows are frames), an optional class
/// label, and optional image paths for displaying each frame.
struct VideoSample {
  std::string id;
  Eigen::MatrixXd frames;
  std::optional<int> label;
  std::vector<std::string> frame_assets;

  std::size_t n_frames() const { return static_cast<std::size_t>(frames.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(frames.cols()); }
  bool has_assets() const { return !frame_assets.empty(); }
};

/// Checks the VideoSample invariants; throws kDataError naming the id.
void validate_video(const VideoSample& video);

/// A loaded manifest. `base_dir` resolves relative frame asset paths.
struct Dataset {
  std::vector<VideoSample> videos;
  int num_classes = 0;
  std::size_t dim = 0;
  std::filesystem::path base_dir;
};

/// Newline-delimited JSON manifest: a header record `{version, C, dim}`
/// followed by one record per video.
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct SplitSizes {
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
  std::size_t test = 0;
  std::size_t oracle_train = 0;
  std::size_t oracle_test = 0;

  std::size_t total() const {
    return labeled + unlabeled + test + oracle_train + oracle_test;
  }
};

/// Pools hold indices into the video list that was split.
struct DatasetSplits {
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> test;
  std::vector<std::size_t> oracle_train;
  std::vector<std::size_t> oracle_test;
  int num_classes = 0;
};

/// Seeded shuffle, then consecutive slices in the order L, U, T, L_oracle,
/// T_oracle. Throws kDataError when a class is missing from L or L_oracle;
/// callers retry with another seed.
DatasetSplits split_dataset(std::span<const VideoSample> videos,
                            int num_classes, const SplitSizes& sizes,
                            std::uint64_t seed);

/// Mean of the frame embeddings.
Eigen::VectorXd pool_video(const VideoSample& video);

/// Mean of the selected frames only.
Eigen::VectorXd pool_frames(const VideoSample& video,
                            std::span<const std::size_t> frame_indices);

/// Pooled features for the given videos, one row per video.
Eigen::MatrixXd pooled_features(std::span<const VideoSample> videos,
                                std::span<const std::size_t> indices);

struct SyntheticParams {
  int num_classes = 5;
  std::size_t videos_per_class = 50;
  std::size_t n_frames = 30;
  std::size_t dim = 16;
  double cluster_spread = 1.0;
  double frame_noise = 1.0;
  std::uint64_t seed = 1;
};

/// Isotropic Gaussian generator: class center (unit scale), plus per-video
/// offset scaled by `cluster_spread`, plus per-frame noise scaled by
/// `frame_noise`. Videos are emitted class-interleaved.
std::vector<VideoSample> generate_synthetic(const SyntheticParams& params);

}  // namespace vidal
