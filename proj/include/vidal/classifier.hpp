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
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

namespace vidal {

/// Multinomial logistic regression: p(y | x) = softmax(W x + b).
struct Model {
  Eigen::MatrixXd weights;  // C x dim
  Eigen::VectorXd bias;     // C

  int num_classes() const { return static_cast<int>(weights.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(weights.cols()); }

  static Model zeros(int num_classes, std::size_t dim);
};

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 200;
  double l2 = 0.0;
  std::uint64_t seed = 0;
};

/// Mean cross-entropy plus (l2 / 2) * ||W||^2 and its gradient.
struct LossAndGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};

LossAndGradient loss_and_gradient(const Model& model,
                                  const Eigen::MatrixXd& features,
                                  std::span<const int> labels, double l2);

/// Full-batch gradient descent from zero parameters. When `loss_trace` is
/// given it receives the loss before every step plus the final loss
/// (epochs + 1 entries). Throws kNumericError naming the epoch if the loss
/// becomes non-finite.
Model train(const Eigen::MatrixXd& features, std::span<const int> labels,
            int num_classes, const TrainConfig& cfg,
            std::vector<double>* loss_trace = nullptr);

Eigen::VectorXd logits(const Model& model, const Eigen::VectorXd& x);

/// Softmax with the max logit subtracted.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

Eigen::VectorXd predict_proba(const Model& model, const Eigen::VectorXd& x);

/// Natural-log Shannon entropy with 0 ln 0 = 0. Rejects vectors that are not
/// distributions (sum off by more than 1e-6 or negative entries).
double entropy(const Eigen::VectorXd& p);

/// Lowest index among maximal entries.
int argmax(const Eigen::VectorXd& v);

int predict(const Model& model, const Eigen::VectorXd& x);

double evaluate_accuracy(const Model& model, const Eigen::MatrixXd& features,
                         std::span<const int> labels);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);

}  // namespace vidal
