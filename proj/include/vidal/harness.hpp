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
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidal/classifier.hpp"
#include "vidal/dataset.hpp"
#include "vidal/frame_select.hpp"
#include "vidal/oracle.hpp"
#include "vidal/video_select.hpp"

namespace vidal {

/// proposed: IQP video selection + k-center frames
/// rr: random videos + random frames
/// er: top-entropy videos + random frames
/// ek: top-entropy videos + k-means frames
enum class Strategy { kProposed, kRandom, kEntropy, kEntropyKMeans };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct DatasetSource {
  /// When set, videos come from this manifest; otherwise from `synthetic`.
  std::optional<std::filesystem::path> manifest;
  SyntheticParams synthetic;
};

struct ExperimentConfig {
  Strategy strategy = Strategy::kProposed;
  std::size_t b = 25;
  std::size_t k = 100;
  double mu = 0.01;
  int iterations = 10;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  DatasetSource dataset;
  SplitSizes split{250, 320, 150, 697, 185};
  TrainConfig base_train;
  TrainConfig oracle_train;
  double oracle_percentile = 50.0;
  Bandwidth bandwidth = MedianBandwidth{};
  int max_power_iters = kDefaultMaxIters;
};

void validate(const ExperimentConfig& cfg);

/// Key/value mapping. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// YAML document with the same keys as config_from_json. Relative manifest
/// paths resolve against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Loop state

/// One training example. `label` is what the learner trains on (the
/// oracle's answer for U-origin entries); `true_label` is kept for reporting.
struct TrainingEntry {
  std::size_t video = 0;
  int label = 0;
  int true_label = 0;
  bool from_oracle = false;
};

/// Immutable per-run data shared by every iteration.
struct RunContext {
  std::span<const VideoSample> videos;
  Eigen::MatrixXd pooled;  // one row per entry of `videos`
  std::vector<std::size_t> test;
  Eigen::MatrixXd test_features;
  std::vector<int> test_labels;
  int num_classes = 0;

  static RunContext build(std::span<const VideoSample> videos,
                          const DatasetSplits& splits);
};

struct LearnerState {
  std::vector<TrainingEntry> labeled;
  /// Dataset indices still unqueried; row i of `diversity` belongs to unlabeled[i].
  std::vector<std::size_t> unlabeled;
  std::optional<DiversityMatrix> diversity;
  Model model;
  std::size_t discarded = 0;
};

/// Trains the base model on L and, for the proposed strategy, computes the
/// diversity matrix of U once.
LearnerState init_learner(const RunContext& ctx, const DatasetSplits& splits,
                          const ExperimentConfig& cfg);

struct QueryItem {
  std::size_t video = 0;  // dataset index
  FrameSubset frames;
};

struct SelectionBatch {
  std::vector<QueryItem> items;
  std::vector<std::size_t> pool_positions;  // positions within state.unlabeled
  std::optional<PowerResult> solver;
};

/// Steps (1) and (2) of an iteration: choose min(b, |U|) videos and their frames.
SelectionBatch select_batch(const RunContext& ctx, const LearnerState& state,
                            const ExperimentConfig& cfg, std::uint64_t run_seed,
                            int iteration);

/// Appends labeled answers to L (abstentions are discarded) and removes every
/// queried video from U and from the diversity matrix. `answers[i]` belongs
/// to batch.items[i].
void apply_answers(const RunContext& ctx, LearnerState& state,
                   const SelectionBatch& batch,
                   std::span<const std::optional<int>> answers);

/// Retrains from scratch on L and returns test accuracy.
double retrain_and_evaluate(const RunContext& ctx, LearnerState& state,
                            const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Reports

struct QueryRecord {
  std::string video_id;
  std::vector<std::size_t> frames;
  OracleVerdict verdict;
  int true_label = 0;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  std::size_t queried = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t discarded = 0;
  double test_accuracy = 0.0;
  std::size_t labeled_size = 0;
  std::size_t unlabeled_size = 0;
  std::vector<double> objective_trace;
  std::vector<QueryRecord> queries;
  double wall_clock_ms = 0.0;  // excluded from the canonical report
};

IterationRecord run_al_iteration(const RunContext& ctx, LearnerState& state,
                                 const ExperimentConfig& cfg,
                                 const OracleConfig& oracle,
                                 std::uint64_t run_seed, int iteration);

struct RunReport {
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  double initial_accuracy = 0.0;
  double oracle_accuracy = 0.0;  // full-video accuracy on T_oracle
  double tau = 0.0;
  std::size_t initial_labeled = 0;
  std::size_t initial_unlabeled = 0;
  std::vector<IterationRecord> iterations;
};

struct AggregatePoint {
  int iteration = 0;  // 0 = before any query
  double mean = 0.0;
  double std = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunReport> runs;
  std::vector<AggregatePoint> accuracy;
};

/// Sample mean and standard deviation (n - 1); std is 0 for a single value.
std::pair<double, double> mean_std(std::span<const double> values);

/// Splits with the run seed, retrying derived seeds on class-coverage failure.
std::pair<DatasetSplits, std::uint64_t> split_for_run(
    std::span<const VideoSample> videos, int num_classes,
    const SplitSizes& sizes, std::uint64_t seed);

/// Loads or generates the dataset named by cfg.dataset.
Dataset materialize_dataset(const ExperimentConfig& cfg);

ExperimentReport run_experiment(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data);

struct OracleStats {
  Strategy strategy = Strategy::kProposed;
  double total_queried = 0.0;  // mean per run
  double correct_mean = 0.0, correct_std = 0.0;
  double incorrect_mean = 0.0, incorrect_std = 0.0;
  double discarded_mean = 0.0, discarded_std = 0.0;
};

/// Correct / incorrect / discarded as percentages of the videos queried per
/// run, mean and sample std across runs.
OracleStats summarize_oracle_stats(const ExperimentReport& report);

inline constexpr int kReportVersion = 1;

/// Canonical report document. Wall-clock timings are only included on request
/// so that identical configurations produce identical bytes.
nlohmann::json report_to_json(std::span<const ExperimentReport> reports,
                              bool include_timing = false);
std::vector<ExperimentReport> report_from_json(const nlohmann::json& j);

/// iteration,strategy,mean,std
std::string accuracy_csv(std::span<const ExperimentReport> reports);
/// strategy,total_queried,correct_mean,correct_std,...
std::string oracle_stats_csv(std::span<const ExperimentReport> reports);

}  // namespace vidal
