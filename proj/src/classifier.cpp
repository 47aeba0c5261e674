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

#include "vidal/classifier.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "vidal/error.hpp"

namespace vidal {

Model Model::zeros(int num_classes, std::size_t dim) {
  Model m;
  m.weights = Eigen::MatrixXd::Zero(num_classes, static_cast<Eigen::Index>(dim));
  m.bias = Eigen::VectorXd::Zero(num_classes);
  return m;
}

namespace {

void check_labels(std::span<const int> labels, Eigen::Index rows, int num_classes) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    fail(ErrorCode::kInvalidArgument, "label count does not match feature rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      fail(ErrorCode::kOutOfRange, "label " + std::to_string(y) +
                                       " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace

LossAndGradient loss_and_gradient(const Model& model,
                                  const Eigen::MatrixXd& features,
                                  std::span<const int> labels, double l2) {
  const Eigen::Index n = features.rows();
  if (n < 1) fail(ErrorCode::kInvalidArgument, "empty training set");
  if (static_cast<std::size_t>(features.cols()) != model.dim()) {
    fail(ErrorCode::kInvalidArgument, "feature dimension mismatch");
  }
  check_labels(labels, n, model.num_classes());

  // scores: n x C
  Eigen::MatrixXd scores = features * model.weights.transpose();
  scores.rowwise() += model.bias.transpose();

  double loss = 0.0;
  Eigen::MatrixXd residual(n, model.num_classes());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = scores.row(i).maxCoeff();
    Eigen::RowVectorXd shifted = scores.row(i).array() - top;
    const double log_norm = std::log(shifted.array().exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    loss -= shifted(y) - log_norm;
    residual.row(i) = (shifted.array() - log_norm).exp();
    residual(i, y) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  LossAndGradient out;
  out.loss = loss * inv_n + 0.5 * l2 * model.weights.squaredNorm();
  out.grad_weights = inv_n * residual.transpose() * features + l2 * model.weights;
  out.grad_bias = inv_n * residual.colwise().sum().transpose();
  return out;
}

Model train(const Eigen::MatrixXd& features, std::span<const int> labels,
            int num_classes, const TrainConfig& cfg,
            std::vector<double>* loss_trace) {
  if (cfg.epochs < 1) fail(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  if (cfg.l2 < 0.0) fail(ErrorCode::kInvalidArgument, "l2 must be >= 0");
  if (num_classes < 1) fail(ErrorCode::kInvalidArgument, "num_classes must be >= 1");
  if (features.rows() < 1) fail(ErrorCode::kInvalidArgument, "empty training set");
  check_labels(labels, features.rows(), num_classes);

  std::vector<bool> present(static_cast<std::size_t>(num_classes), false);
  for (int y : labels) present[static_cast<std::size_t>(y)] = true;
  for (int c = 0; c < num_classes; ++c) {
    if (!present[static_cast<std::size_t>(c)]) {
      warn("train: class " + std::to_string(c) + " has no examples");
    }
  }

  // Zero initialization makes the result independent of cfg.seed.
  Model model = Model::zeros(num_classes, static_cast<std::size_t>(features.cols()));
  if (loss_trace) loss_trace->clear();
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    LossAndGradient lg = loss_and_gradient(model, features, labels, cfg.l2);
    if (!std::isfinite(lg.loss)) {
      fail(ErrorCode::kNumericError,
           "non-finite training loss at epoch " + std::to_string(epoch) +
               " (learning rate too high?)");
    }
    if (loss_trace) loss_trace->push_back(lg.loss);
    if (epoch == cfg.epochs) break;
    model.weights -= cfg.learning_rate * lg.grad_weights;
    model.bias -= cfg.learning_rate * lg.grad_bias;
  }
  return model;
}

Eigen::VectorXd logits(const Model& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.dim()) {
    fail(ErrorCode::kInvalidArgument,
         "dimension mismatch: model expects " + std::to_string(model.dim()) +
             ", got " + std::to_string(x.size()));
  }
  return model.weights * x + model.bias;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::VectorXd predict_proba(const Model& model, const Eigen::VectorXd& x) {
  return softmax(logits(model, x));
}

double entropy(const Eigen::VectorXd& p) {
  if (p.size() == 0) fail(ErrorCode::kInvalidArgument, "empty distribution");
  if ((p.array() < 0.0).any() || !p.allFinite() || std::abs(p.sum() - 1.0) > 1e-6) {
    fail(ErrorCode::kInvalidArgument, "not a probability distribution");
  }
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  }
  return h < 0.0 ? 0.0 : h;
}

int argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

int predict(const Model& model, const Eigen::VectorXd& x) {
  return argmax(logits(model, x));
}

double evaluate_accuracy(const Model& model, const Eigen::MatrixXd& features,
                         std::span<const int> labels) {
  if (features.rows() == 0) fail(ErrorCode::kInvalidArgument, "empty test pool");
  check_labels(labels, features.rows(), model.num_classes());
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    if (predict(model, features.row(i).transpose()) == labels[static_cast<std::size_t>(i)]) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(features.rows());
}

nlohmann::json model_to_json(const Model& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["C"] = model.num_classes();
  j["dim"] = model.dim();
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(model.weights.size()));
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) w.push_back(model.weights(r, c));
  }
  j["W"] = std::move(w);
  j["b"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != 1) {
    fail(ErrorCode::kDataError, "unsupported model record version");
  }
  const int c = j.at("C").get<int>();
  const auto dim = j.at("dim").get<std::size_t>();
  const auto w = j.at("W").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (c < 1 || w.size() != static_cast<std::size_t>(c) * dim ||
      b.size() != static_cast<std::size_t>(c)) {
    fail(ErrorCode::kDataError, "model record shape mismatch");
  }
  Model m = Model::zeros(c, dim);
  for (int r = 0; r < c; ++r) {
    for (std::size_t k = 0; k < dim; ++k) {
      m.weights(r, static_cast<Eigen::Index>(k)) = w[static_cast<std::size_t>(r) * dim + k];
    }
    m.bias(r) = b[static_cast<std::size_t>(r)];
  }
  if (!m.weights.allFinite() || !m.bias.allFinite()) {
    fail(ErrorCode::kDataError, "model record has non-finite parameters");
  }
  return m;
}

}  // namespace vidal
