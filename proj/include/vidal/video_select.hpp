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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vidal/classifier.hpp"

namespace vidal {

/// Binary selection over a pool of `pool_size` items, stored as the sorted
/// list of chosen indices (exactly `indices.size()` ones).
struct Selection {
  std::size_t pool_size = 0;
  std::vector<std::size_t> indices;

  std::size_t batch_size() const { return indices.size(); }
  Eigen::VectorXd indicator() const;
  bool operator==(const Selection&) const = default;
};

Selection selection_from_indices(std::size_t pool_size,
                                 std::vector<std::size_t> indices);

/// Indices of the `b` largest entries, ties to the lowest index, sorted.
std::vector<std::size_t> top_b_indices(const Eigen::VectorXd& values,
                                       std::size_t b);

// ---------------------------------------------------------------------------
// Uncertainty and diversity

/// Prediction entropy of each row of `features` (one pooled video per row).
Eigen::VectorXd entropy_vector(const Model& model, const Eigen::MatrixXd& features);

struct MedianBandwidth {};
using Bandwidth = std::variant<double, MedianBandwidth>;

/// Pairwise RKHS distances under a Gaussian kernel:
///   R(i,j) = sqrt(k(xi,xi) + k(xj,xj) - 2 k(xi,xj)) = sqrt(2 - 2 k(xi,xj)),
///   k(x,y) = exp(-||x - y||^2 / (2 sigma^2)).
/// Each entry depends only on its own pair of rows, so deleting rows and
/// columns reproduces a recomputation on the surviving pool bit for bit.
struct DiversityMatrix {
  Eigen::MatrixXd values;
  double sigma = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// Median of the non-zero pairwise Euclidean distances between rows.
/// Returns nullopt when every pair coincides.
std::optional<double> median_pairwise_distance(const Eigen::MatrixXd& points);

DiversityMatrix diversity_matrix(const Eigen::MatrixXd& features,
                                 Bandwidth bandwidth = MedianBandwidth{});

/// Kernel distance for one pair; the building block of diversity_matrix.
double kernel_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                       const Eigen::Ref<const Eigen::RowVectorXd>& b,
                       double sigma);

struct PrunedDiversity {
  DiversityMatrix matrix;
  std::vector<std::size_t> kept;  // new index -> old index
};

/// Deletes the rows and columns listed in `removed`.
PrunedDiversity prune_diversity(const DiversityMatrix& r,
                                std::span<const std::size_t> removed);

// ---------------------------------------------------------------------------
// Quadratic program

/// Q(i,i) = e(i) + shift, Q(i,j) = mu * R(i,j) for i != j.
struct QMatrix {
  Eigen::MatrixXd values;
  double mu = 0.0;
  double shift = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

QMatrix build_q(const Eigen::VectorXd& entropies, const DiversityMatrix& r, double mu);

inline constexpr double kPsdEpsilon = 1e-9;

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// Adds max(0, -lambda_min) + kPsdEpsilon to the diagonal. Over fixed-size
/// binary z this adds the constant shift * b to every objective value.
QMatrix psd_shift(const QMatrix& q);

double objective(const Eigen::MatrixXd& q, const Selection& z);

/// Indicator of the `b` largest column sums.
Selection column_sum_start(const Eigen::MatrixXd& q, std::size_t b);

struct PowerResult {
  Selection selection;
  Selection start;
  /// z^T Q z for the start and after every iteration (iterations + 1 entries),
  /// evaluated on the Q the iteration ran on (shift included).
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  /// Extra diagonal shift applied here because the input was not PSD.
  double applied_shift = 0.0;
};

inline constexpr int kDefaultMaxIters = 100;

/// Truncated power iteration: z_t = top_b(Q z_{t-1}) until the support
/// repeats or `max_iters` is reached. Starts from the column-sum indicator
/// unless `start` is given. If lambda_min(Q) < -1e-6 the PSD shift is applied
/// first.
PowerResult truncated_power_select(const QMatrix& q, std::size_t b,
                                   int max_iters = kDefaultMaxIters,
                                   std::optional<Selection> start = std::nullopt);

// ---------------------------------------------------------------------------
// Baselines

Selection select_videos_random(std::size_t pool_size, std::size_t b,
                               std::uint64_t seed);

Selection select_videos_entropy(const Eigen::VectorXd& entropies, std::size_t b);

// ---------------------------------------------------------------------------
// Random projection

/// B = A X with X (D x d) filled by N(0, 1/d) entries drawn from `seed`.
Eigen::MatrixXd random_project(const Eigen::MatrixXd& a, std::size_t d,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Debug export: "# vidal-matrix v1 rows=R cols=C key=value ..." followed by
// row-major rows of space-separated values.

void write_matrix_text(std::ostream& out, const Eigen::MatrixXd& m,
                       std::span<const std::pair<std::string, double>> attrs = {});
void write_q_text(std::ostream& out, const QMatrix& q);
void write_diversity_text(std::ostream& out, const DiversityMatrix& r);
void write_trace_text(std::ostream& out, const PowerResult& result);

}  // namespace vidal
