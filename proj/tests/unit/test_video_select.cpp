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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "test_util.hpp"
#include "vidal/error.hpp"
#include "vidal/video_select.hpp"

using namespace vidal;

namespace {

// Exhaustive maximum of z^T Q z over all |z| = b.
double brute_force_max(const Eigen::MatrixXd& q, std::size_t b) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : test::subsets(static_cast<std::size_t>(q.rows()), b)) {
    double v = 0.0;
    for (auto i : s)
      for (auto j : s) v += q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    best = std::max(best, v);
  }
  return best;
}

Eigen::MatrixXd random_psd(Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = test::random_matrix(rng, n, n);
  return a * a.transpose() / static_cast<double>(n);
}

}  // namespace

TEST_CASE("top_b_indices breaks ties toward low indices") {
  CHECK(top_b_indices(Eigen::Vector4d(1, 2, 2, 2), 2) == std::vector<std::size_t>{1, 2});
  CHECK(top_b_indices(Eigen::Vector3d(0.1, 0.9, 0.5), 2) == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS(top_b_indices(Eigen::Vector2d(1, 2), 3), Error);
}

TEST_CASE("selection_from_indices") {
  const Selection s = selection_from_indices(5, {3, 1});
  CHECK(s.indices == std::vector<std::size_t>{1, 3});
  CHECK(s.indicator() == (Eigen::VectorXd(5) << 0, 1, 0, 1, 0).finished());
  CHECK_THROWS_AS(selection_from_indices(3, {3}), Error);
  CHECK_THROWS_AS(selection_from_indices(3, {1, 1}), Error);
}

TEST_CASE("entropy_vector") {
  SUBCASE("zero model gives ln C everywhere") {
    const Model m = Model::zeros(4, 3);
    Rng rng(1);
    const Eigen::VectorXd e = entropy_vector(m, test::random_matrix(rng, 6, 3));
    for (Eigen::Index i = 0; i < e.size(); ++i) CHECK(e(i) == doctest::Approx(std::log(4.0)));
  }
  SUBCASE("hand-set logits per video") {
    // Identity weights make each feature row the logit vector.
    Model m = Model::zeros(3, 3);
    m.weights = Eigen::Matrix3d::Identity();
    const Eigen::MatrixXd x = (Eigen::MatrixXd(3, 3) << 0, 0, 0,
                                                        std::log(2.0), 0, 0,
                                                        50, 0, 0).finished();
    const Eigen::VectorXd e = entropy_vector(m, x);
    CHECK(e(0) == doctest::Approx(std::log(3.0)));
    // p = (1/2, 1/4, 1/4): H = 1/2 ln 2 + 2 * 1/4 ln 4 = 1.5 ln 2
    CHECK(e(1) == doctest::Approx(1.5 * std::log(2.0)));
    CHECK(e(2) < 1e-18);
    CHECK_THROWS_AS(entropy_vector(m, Eigen::MatrixXd::Zero(2, 4)), Error);
  }
}

TEST_CASE("kernel distance") {
  const Eigen::RowVector2d a(0, 0);
  const Eigen::RowVector2d b(1, 1);  // squared distance 2
  // k = e^-1, R = sqrt(2 - 2 e^-1)
  CHECK(kernel_distance(a, b, 1.0) == doctest::Approx(std::sqrt(2.0 - 2.0 * std::exp(-1.0))).epsilon(1e-14));
  CHECK(kernel_distance(a, b, 1.0) == doctest::Approx(1.1244).epsilon(1e-4));
  CHECK(kernel_distance(a, a, 1.0) == 0.0);
  CHECK(kernel_distance(a, Eigen::RowVector2d(1e6, 0), 1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(kernel_distance(a, b, 0.0), Error);
}

TEST_CASE("diversity_matrix") {
  Rng rng(5);
  const Eigen::MatrixXd x = test::random_matrix(rng, 9, 4);
  const DiversityMatrix r = diversity_matrix(x);
  CHECK(r.sigma == doctest::Approx(*median_pairwise_distance(x)));
  for (Eigen::Index i = 0; i < 9; ++i) {
    CHECK(r.values(i, i) == 0.0);
    for (Eigen::Index j = 0; j < 9; ++j) {
      CHECK(r.values(i, j) == r.values(j, i));
      CHECK(r.values(i, j) >= 0.0);
      CHECK(r.values(i, j) <= std::sqrt(2.0));
    }
  }

  SUBCASE("identical rows") {
    Eigen::MatrixXd y = x;
    y.row(3) = y.row(1);
    CHECK(diversity_matrix(y, 1.0).values(1, 3) == 0.0);
  }
  SUBCASE("all-identical pool falls back to sigma 1") {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(4, 2);
    CHECK_FALSE(median_pairwise_distance(same).has_value());
    const DiversityMatrix d = diversity_matrix(same);
    CHECK(d.sigma == 1.0);
    CHECK(d.values.isZero());
  }
  SUBCASE("bad bandwidth") {
    CHECK_THROWS_AS(diversity_matrix(x, -1.0), Error);
  }
  SUBCASE("median of a known configuration") {
    // Distances: 1, 2, 3 -> median 2.
    const Eigen::MatrixXd pts = (Eigen::MatrixXd(3, 1) << 0, 1, 3).finished();
    CHECK(*median_pairwise_distance(pts) == doctest::Approx(2.0));
  }
}

TEST_CASE("prune_diversity") {
  Rng rng(11);
  const Eigen::MatrixXd x = test::random_matrix(rng, 12, 5);
  const DiversityMatrix r = diversity_matrix(x);

  SUBCASE("nothing removed") {
    const auto p = prune_diversity(r, {});
    CHECK(p.matrix.values == r.values);
    CHECK(p.kept.size() == 12);
  }
  SUBCASE("matches a recomputation bit for bit") {
    const std::vector<std::size_t> removed{0, 4, 5, 11};
    const auto p = prune_diversity(r, removed);
    CHECK(p.kept == std::vector<std::size_t>{1, 2, 3, 6, 7, 8, 9, 10});
    Eigen::MatrixXd survivors(8, 5);
    for (std::size_t i = 0; i < p.kept.size(); ++i)
      survivors.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(p.kept[i]));
    const DiversityMatrix fresh = diversity_matrix(survivors, r.sigma);
    CHECK(p.matrix.values == fresh.values);
    CHECK(p.matrix.sigma == r.sigma);
  }
  SUBCASE("repeated pruning") {
    auto p = prune_diversity(r, std::vector<std::size_t>{2});
    p = prune_diversity(p.matrix, std::vector<std::size_t>{0, 3});
    CHECK(p.matrix.size() == 9);
  }
  SUBCASE("down to one") {
    std::vector<std::size_t> removed(11);
    for (std::size_t i = 0; i < 11; ++i) removed[i] = i + 1;
    const auto p = prune_diversity(r, removed);
    CHECK(p.matrix.values.rows() == 1);
    CHECK(p.matrix.values(0, 0) == 0.0);
    CHECK(p.kept == std::vector<std::size_t>{0});
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(prune_diversity(r, std::vector<std::size_t>{12}), Error);
  }
}

TEST_CASE("build_q") {
  DiversityMatrix r;
  r.values = (Eigen::MatrixXd(2, 2) << 0, 0.5, 0.5, 0).finished();
  const QMatrix q = build_q(Eigen::Vector2d(0.1, 0.2), r, 0.01);
  CHECK(q.values(0, 0) == doctest::Approx(0.1));
  CHECK(q.values(1, 1) == doctest::Approx(0.2));
  CHECK(q.values(0, 1) == doctest::Approx(0.005));
  CHECK(q.values(1, 0) == doctest::Approx(0.005));
  CHECK(q.shift == 0.0);

  const QMatrix diag = build_q(Eigen::Vector2d(0.1, 0.2), r, 0.0);
  CHECK(diag.values(0, 1) == 0.0);
  CHECK_THROWS_AS(build_q(Eigen::Vector3d(1, 2, 3), r, 0.01), Error);
  CHECK_THROWS_AS(build_q(Eigen::Vector2d(1, 2), r, -1.0), Error);
}

TEST_CASE("psd_shift") {
  QMatrix q;
  q.values = (Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished();
  CHECK(min_eigenvalue(q.values) == doctest::Approx(-1.0));
  const QMatrix s = psd_shift(q);
  CHECK(s.shift == doctest::Approx(1.0 + kPsdEpsilon).epsilon(1e-14));
  CHECK(s.values(0, 0) == doctest::Approx(1.0 + kPsdEpsilon));
  CHECK(min_eigenvalue(s.values) >= 0.0);

  QMatrix pd;
  pd.values = Eigen::Vector3d(1, 2, 3).asDiagonal();
  CHECK(psd_shift(pd).shift == kPsdEpsilon);

  SUBCASE("shift preserves the argmax over fixed-size subsets") {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
      QMatrix r;
      r.values = test::random_matrix(rng, 6, 6);
      r.values = (r.values + r.values.transpose()).eval();
      const QMatrix shifted = psd_shift(r);
      std::size_t best_a = 0, best_b = 0;
      double va = -1e300, vb = -1e300;
      const auto all = test::subsets(6, 3);
      for (std::size_t i = 0; i < all.size(); ++i) {
        const Selection z = selection_from_indices(6, all[i]);
        const double a = objective(r.values, z), b = objective(shifted.values, z);
        CHECK(b - a == doctest::Approx(3 * shifted.shift));
        if (a > va) va = a, best_a = i;
        if (b > vb) vb = b, best_b = i;
      }
      CHECK(best_a == best_b);
    }
  }
}

TEST_CASE("truncated_power_select") {
  SUBCASE("3x3 example") {
    QMatrix q;
    q.values = (Eigen::MatrixXd(3, 3) << 0.5, 0.02, 0.04, 0.02, 0.9, 0.01, 0.04, 0.01, 0.2).finished();
    CHECK(objective(q.values, selection_from_indices(3, {0, 1})) == doctest::Approx(1.44));
    CHECK(objective(q.values, selection_from_indices(3, {0, 2})) == doctest::Approx(0.78));
    CHECK(objective(q.values, selection_from_indices(3, {1, 2})) == doctest::Approx(1.12));
    const PowerResult res = truncated_power_select(q, 2);
    CHECK(res.selection.indices == std::vector<std::size_t>{0, 1});
    CHECK(res.converged);
    CHECK(res.applied_shift == 0.0);
    CHECK(res.objective_trace.back() == doctest::Approx(brute_force_max(q.values, 2)));
  }
  SUBCASE("b equal to the pool size") {
    Rng rng(2);
    QMatrix q;
    q.values = random_psd(rng, 5);
    const PowerResult res = truncated_power_select(q, 5);
    CHECK(res.selection.indices == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(res.iterations == 1);
    CHECK(res.converged);
  }
  SUBCASE("diagonal Q picks the largest diagonal entries") {
    QMatrix q;
    q.values = (Eigen::VectorXd(5) << 0.3, 0.9, 0.1, 0.7, 0.5).finished().asDiagonal();
    for (std::size_t b = 1; b <= 5; ++b) {
      const PowerResult res = truncated_power_select(q, b);
      CHECK(res.objective_trace.back() == doctest::Approx(brute_force_max(q.values, b)));
    }
    CHECK(truncated_power_select(q, 2).selection.indices == std::vector<std::size_t>{1, 3});
  }
  SUBCASE("b out of range") {
    QMatrix q;
    q.values = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(truncated_power_select(q, 0), Error);
    CHECK_THROWS_AS(truncated_power_select(q, 3), Error);
  }
  SUBCASE("indefinite input is shifted internally") {
    QMatrix q;
    q.values = (Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished();
    const PowerResult res = truncated_power_select(q, 1);
    CHECK(res.applied_shift == doctest::Approx(1.0 + kPsdEpsilon));
  }
}

TEST_CASE("power iteration properties on random PSD instances") {
  Rng rng(99);
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<Eigen::Index>(3 + uniform_index(rng, 10));
    const std::size_t b = 1 + uniform_index(rng, std::min<std::size_t>(4, static_cast<std::size_t>(n)));
    QMatrix q;
    q.values = random_psd(rng, n);
    const PowerResult res = truncated_power_select(q, b);
    CHECK(res.start == column_sum_start(q.values, b));
    CHECK(res.objective_trace.size() == static_cast<std::size_t>(res.iterations) + 1);
    CHECK(res.iterations <= kDefaultMaxIters);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
      CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-12);
    CHECK(res.objective_trace.back() <= brute_force_max(q.values, b) + 1e-12);

    // A converged support is a fixpoint.
    if (res.converged) {
      const PowerResult again = truncated_power_select(q, b, kDefaultMaxIters, res.selection);
      CHECK(again.selection == res.selection);
      CHECK(again.iterations == 1);
    }
    // Positive rescaling does not change the selection.
    QMatrix scaled = q;
    scaled.values *= 7.5;
    CHECK(truncated_power_select(scaled, b).selection == res.selection);
  }
}

TEST_CASE("random video baseline") {
  CHECK(select_videos_random(4, 4, 1).indices == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(select_videos_random(50, 5, 42) == select_videos_random(50, 5, 42));
  CHECK_THROWS_AS(select_videos_random(3, 4, 1), Error);

  std::vector<int> hits(10, 0);
  constexpr int kDraws = 10000;
  for (int s = 0; s < kDraws; ++s)
    for (auto i : select_videos_random(10, 2, static_cast<std::uint64_t>(s)).indices) ++hits[i];
  for (int h : hits) CHECK(std::abs(h / double(kDraws) - 0.2) <= 0.02);
}

TEST_CASE("entropy video baseline") {
  CHECK(select_videos_entropy(Eigen::Vector3d(0.1, 0.9, 0.5), 2).indices == std::vector<std::size_t>{1, 2});
  CHECK(select_videos_entropy(Eigen::Vector3d(0.4, 0.4, 0.4), 2).indices == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(select_videos_entropy(Eigen::Vector2d(1, 2), 3), Error);

  // With no diversity weight the QP reduces to ranking entropies.
  Rng rng(31);
  for (int t = 0; t < 30; ++t) {
    const auto n = static_cast<Eigen::Index>(4 + uniform_index(rng, 20));
    Eigen::VectorXd e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = std::abs(standard_normal(rng)) + 1e-3 * static_cast<double>(i);
    const DiversityMatrix r = diversity_matrix(test::random_matrix(rng, n, 3));
    const std::size_t b = 1 + uniform_index(rng, static_cast<std::size_t>(n));
    const PowerResult res = truncated_power_select(build_q(e, r, 0.0), b);
    CHECK(res.selection == select_videos_entropy(e, b));
  }
}

TEST_CASE("random_project") {
  Rng rng(6);
  const Eigen::MatrixXd a = test::random_matrix(rng, 10, 40);
  CHECK(random_project(Eigen::MatrixXd::Zero(10, 40), 8, 1).isZero());
  CHECK(random_project(a, 8, 3) == random_project(a, 8, 3));
  CHECK(random_project(a, 8, 3) != random_project(a, 8, 4));
  CHECK(random_project(a, 8, 3).cols() == 8);
  CHECK_THROWS_AS(random_project(a, 0, 1), Error);
  CHECK_THROWS_AS(random_project(a, 40, 1), Error);
}

TEST_CASE("matrix text export") {
  QMatrix q;
  q.values = (Eigen::MatrixXd(2, 2) << 0.1, 0.005, 0.005, 0.2).finished();
  q.mu = 0.01;
  std::ostringstream out;
  write_q_text(out, q);
  const std::string text = out.str();
  CHECK(text.rfind("# vidal-matrix v1 rows=2 cols=2", 0) == 0);
  CHECK(text.find("mu=0.01") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
