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

#include "vidal/video_select.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "vidal/error.hpp"
#include "vidal/random.hpp"

namespace vidal {

Eigen::VectorXd Selection::indicator() const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pool_size));
  for (auto i : indices) z(static_cast<Eigen::Index>(i)) = 1.0;
  return z;
}

Selection selection_from_indices(std::size_t pool_size,
                                 std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    fail(ErrorCode::kInvalidArgument, "selection has duplicate indices");
  }
  if (!indices.empty() && indices.back() >= pool_size) {
    fail(ErrorCode::kOutOfRange, "selection index out of range");
  }
  return Selection{pool_size, std::move(indices)};
}

std::vector<std::size_t> top_b_indices(const Eigen::VectorXd& values, std::size_t b) {
  const auto n = static_cast<std::size_t>(values.size());
  if (b > n) {
    fail(ErrorCode::kOutOfRange, "batch size " + std::to_string(b) +
                                     " exceeds pool size " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(b),
                    order.end(), [&](std::size_t a, std::size_t c) {
                      const double va = values(static_cast<Eigen::Index>(a));
                      const double vc = values(static_cast<Eigen::Index>(c));
                      return va > vc || (va == vc && a < c);
                    });
  order.resize(b);
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

void require_batch(std::size_t b, std::size_t n) {
  if (b < 1 || b > n) {
    fail(ErrorCode::kOutOfRange, "batch size " + std::to_string(b) +
                                     " outside [1, " + std::to_string(n) + "]");
  }
}

double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  // Plain loop: the summation order must not depend on memory layout.
  double s = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double diff = a(d) - b(d);
    s += diff * diff;
  }
  return s;
}

}  // namespace

Eigen::VectorXd entropy_vector(const Model& model, const Eigen::MatrixXd& features) {
  if (features.rows() == 0) fail(ErrorCode::kInvalidArgument, "empty unlabeled pool");
  Eigen::VectorXd e(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    e(i) = entropy(predict_proba(model, features.row(i).transpose()));
  }
  return e;
}

std::optional<double> median_pairwise_distance(const Eigen::MatrixXd& points) {
  std::vector<double> dists;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      const double d = std::sqrt(squared_distance(points.row(i), points.row(j)));
      if (d > 0.0) dists.push_back(d);
    }
  }
  if (dists.empty()) return std::nullopt;
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  const double upper = dists[mid];
  if (dists.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double kernel_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                       const Eigen::Ref<const Eigen::RowVectorXd>& b, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorCode::kInvalidArgument, "kernel_distance: sigma must be positive and finite");
  if (a.size() != b.size()) fail(ErrorCode::kInvalidArgument, "kernel_distance: dimension mismatch");
  const double k = std::exp(-squared_distance(a, b) / (2.0 * sigma * sigma));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * k));
}

DiversityMatrix diversity_matrix(const Eigen::MatrixXd& features, Bandwidth bandwidth) {
  const Eigen::Index n = features.rows();
  if (n < 1) fail(ErrorCode::kInvalidArgument, "diversity_matrix: empty pool");

  double sigma = 1.0;
  if (const double* fixed = std::get_if<double>(&bandwidth)) {
    if (!(*fixed > 0.0) || !std::isfinite(*fixed)) {
      fail(ErrorCode::kInvalidArgument, "kernel bandwidth must be > 0");
    }
    sigma = *fixed;
  } else if (auto median = median_pairwise_distance(features)) {
    sigma = *median;
  } else {
    warn("diversity_matrix: all pooled features coincide, using sigma = 1");
  }

  DiversityMatrix r;
  r.sigma = sigma;
  r.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = kernel_distance(features.row(i), features.row(j), sigma);
      r.values(i, j) = d;
      r.values(j, i) = d;
    }
  }
  return r;
}

PrunedDiversity prune_diversity(const DiversityMatrix& r,
                                std::span<const std::size_t> removed) {
  const std::size_t n = r.size();
  std::vector<bool> drop(n, false);
  for (auto i : removed) {
    if (i >= n) {
      fail(ErrorCode::kOutOfRange, "prune_diversity: index " + std::to_string(i) +
                                       " out of range for size " + std::to_string(n));
    }
    drop[i] = true;
  }
  PrunedDiversity out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) out.kept.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(out.kept.size());
  out.matrix.sigma = r.sigma;
  out.matrix.values.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      out.matrix.values(a, b) = r.values(static_cast<Eigen::Index>(out.kept[static_cast<std::size_t>(a)]),
                                         static_cast<Eigen::Index>(out.kept[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

QMatrix build_q(const Eigen::VectorXd& entropies, const DiversityMatrix& r, double mu) {
  if (static_cast<std::size_t>(entropies.size()) != r.size()) {
    fail(ErrorCode::kInvalidArgument,
         "build_q: entropy vector length " + std::to_string(entropies.size()) +
             " does not match diversity size " + std::to_string(r.size()));
  }
  if (!(mu >= 0.0)) fail(ErrorCode::kInvalidArgument, "build_q: mu must be >= 0");
  QMatrix q;
  q.mu = mu;
  q.values = mu * r.values;
  q.values.diagonal() = entropies;
  return q;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  if (!symmetric.allFinite()) {
    fail(ErrorCode::kNumericError, "eigenvalue computation on non-finite matrix");
  }
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::kNumericError, "symmetric eigensolver did not converge");
  }
  return solver.eigenvalues().minCoeff();
}

QMatrix psd_shift(const QMatrix& q) {
  const double shift = std::max(0.0, -min_eigenvalue(q.values)) + kPsdEpsilon;
  QMatrix out = q;
  out.values.diagonal().array() += shift;
  out.shift += shift;
  return out;
}

double objective(const Eigen::MatrixXd& q, const Selection& z) {
  double s = 0.0;
  for (auto i : z.indices) {
    for (auto j : z.indices) {
      s += q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return s;
}

Selection column_sum_start(const Eigen::MatrixXd& q, std::size_t b) {
  const Eigen::VectorXd sums = q.colwise().sum().transpose();
  return Selection{static_cast<std::size_t>(q.rows()), top_b_indices(sums, b)};
}

PowerResult truncated_power_select(const QMatrix& q, std::size_t b, int max_iters,
                                   std::optional<Selection> start) {
  const std::size_t n = q.size();
  require_batch(b, n);
  if (max_iters < 1) fail(ErrorCode::kInvalidArgument, "max_iters must be >= 1");

  PowerResult result;
  Eigen::MatrixXd work = q.values;
  const double lambda_min = min_eigenvalue(work);
  if (lambda_min < -1e-6) {
    result.applied_shift = -lambda_min + kPsdEpsilon;
    work.diagonal().array() += result.applied_shift;
  }

  Selection current;
  if (start) {
    if (start->pool_size != n || start->batch_size() != b) {
      fail(ErrorCode::kInvalidArgument, "start selection does not match pool/batch size");
    }
    current = selection_from_indices(n, start->indices);
  } else {
    current = column_sum_start(work, b);
  }
  result.start = current;
  result.objective_trace.push_back(objective(work, current));

  for (int t = 1; t <= max_iters; ++t) {
    const Eigen::VectorXd projected = work * current.indicator();
    Selection next{n, top_b_indices(projected, b)};
    result.iterations = t;
    result.objective_trace.push_back(objective(work, next));
    const bool fixed_point = next == current;
    current = std::move(next);
    if (fixed_point) {
      result.converged = true;
      break;
    }
  }
  result.selection = std::move(current);
  return result;
}

Selection select_videos_random(std::size_t pool_size, std::size_t b, std::uint64_t seed) {
  require_batch(b, pool_size);
  Rng rng(seed);
  return selection_from_indices(pool_size, sample_without_replacement(pool_size, b, rng));
}

Selection select_videos_entropy(const Eigen::VectorXd& entropies, std::size_t b) {
  const auto n = static_cast<std::size_t>(entropies.size());
  require_batch(b, n);
  return Selection{n, top_b_indices(entropies, b)};
}

Eigen::MatrixXd random_project(const Eigen::MatrixXd& a, std::size_t d, std::uint64_t seed) {
  const auto big_d = static_cast<std::size_t>(a.cols());
  if (d < 1 || d >= big_d) {
    fail(ErrorCode::kOutOfRange, "projection dimension " + std::to_string(d) +
                                     " outside [1, " + std::to_string(big_d) + ")");
  }
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Eigen::MatrixXd x(a.cols(), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = scale * standard_normal(rng);
  }
  return a * x;
}

void write_matrix_text(std::ostream& out, const Eigen::MatrixXd& m,
                       std::span<const std::pair<std::string, double>> attrs) {
  const auto old_precision = out.precision(17);
  out << "# vidal-matrix v1 rows=" << m.rows() << " cols=" << m.cols();
  for (const auto& [key, value] : attrs) out << ' ' << key << '=' << value;
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << m(r, c);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

void write_q_text(std::ostream& out, const QMatrix& q) {
  const std::pair<std::string, double> attrs[] = {{"mu", q.mu}, {"shift", q.shift}};
  write_matrix_text(out, q.values, attrs);
}

void write_diversity_text(std::ostream& out, const DiversityMatrix& r) {
  const std::pair<std::string, double> attrs[] = {{"sigma", r.sigma}};
  write_matrix_text(out, r.values, attrs);
}

void write_trace_text(std::ostream& out, const PowerResult& result) {
  const auto old_precision = out.precision(17);
  out << "# vidal-trace v1 iterations=" << result.iterations
      << " converged=" << (result.converged ? 1 : 0)
      << " applied_shift=" << result.applied_shift << '\n';
  for (std::size_t t = 0; t < result.objective_trace.size(); ++t) {
    out << t << ' ' << result.objective_trace[t] << '\n';
  }
  out << "selected";
  for (auto i : result.selection.indices) out << ' ' << i;
  out << '\n';
  out.precision(old_precision);
}

}  // namespace vidal
