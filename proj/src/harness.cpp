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

#include "vidal/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "vidal/error.hpp"
#include "vidal/random.hpp"

namespace vidal {

using nlohmann::json;

namespace {

// Seed streams; every random decision in a run derives from (run seed, stream).
constexpr std::uint64_t kVideoStream = 1000;
constexpr std::uint64_t kFrameStream = 2000;
constexpr std::uint64_t kSplitStream = 3000;

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kProposed:
      return "proposed";
    case Strategy::kRandom:
      return "rr";
    case Strategy::kEntropy:
      return "er";
    case Strategy::kEntropyKMeans:
      return "ek";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "proposed") return Strategy::kProposed;
  if (name == "rr") return Strategy::kRandom;
  if (name == "er") return Strategy::kEntropy;
  if (name == "ek") return Strategy::kEntropyKMeans;
  fail(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(name) +
                                        "' (expected proposed, rr, er or ek)");
}

void validate(const ExperimentConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, "config: " + what); };
  if (cfg.b < 1) bad("b must be >= 1");
  if (cfg.k < 1) bad("k must be >= 1");
  if (!(cfg.mu >= 0.0) || !std::isfinite(cfg.mu)) bad("mu must be finite and >= 0");
  if (cfg.iterations < 1) bad("iterations must be >= 1");
  if (cfg.seeds.empty()) bad("at least one seed is required");
  if (cfg.split.labeled < 1) bad("split L must be >= 1");
  if (cfg.split.oracle_train < 1) bad("split L_oracle must be >= 1");
  if (cfg.split.oracle_test < 1) bad("split T_oracle must be >= 1");
  if (cfg.split.test < 1) bad("split T must be >= 1");
  if (!(cfg.oracle_percentile > 0.0 && cfg.oracle_percentile <= 100.0)) {
    bad("oracle_percentile must lie in (0, 100]");
  }
  if (cfg.max_power_iters < 1) bad("max_power_iters must be >= 1");
  for (const TrainConfig* t : {&cfg.base_train, &cfg.oracle_train}) {
    if (t->epochs < 1) bad("epochs must be >= 1");
    if (!(t->learning_rate > 0.0)) bad("learning_rate must be > 0");
    if (t->l2 < 0.0) bad("l2 must be >= 0");
  }
  if (const double* s = std::get_if<double>(&cfg.bandwidth); s && !(*s > 0.0)) {
    bad("sigma must be > 0 or \"median\"");
  }
}

// ---------------------------------------------------------------------------
// Config documents

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kInvalidArgument, "config: " + where + " must be a mapping");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::kInvalidArgument, "config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidArgument, "config: bad value for '" + std::string(key) + "' in " + where);
  }
}

TrainConfig train_from_json(const json& j, TrainConfig t, const std::string& where) {
  check_keys(j, {"learning_rate", "epochs", "l2", "seed"}, where);
  read(j, "learning_rate", t.learning_rate, where);
  read(j, "epochs", t.epochs, where);
  read(j, "l2", t.l2, where);
  read(j, "seed", t.seed, where);
  return t;
}

json train_to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"epochs", t.epochs}, {"l2", t.l2}, {"seed", t.seed}};
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string text = node.Scalar();
      if (node.Tag() == "!") return text;  // quoted
      long long i;
      if (YAML::convert<long long>::decode(node, i)) return i;
      double d;
      if (YAML::convert<double>::decode(node, d)) return d;
      bool b;
      if (YAML::convert<bool>::decode(node, b)) return b;
      if (text == "~" || text == "null") return nullptr;
      return text;
    }
  }
  return nullptr;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  const std::string top = "config";
  check_keys(j, {"strategy", "b", "k", "mu", "iterations", "runs", "seeds", "dataset", "split",
                 "base_train", "oracle_train", "oracle_percentile", "sigma", "max_power_iters"},
             top);
  if (j.contains("strategy")) cfg.strategy = parse_strategy(j.at("strategy").get<std::string>());
  read(j, "b", cfg.b, top);
  read(j, "k", cfg.k, top);
  read(j, "mu", cfg.mu, top);
  read(j, "iterations", cfg.iterations, top);
  read(j, "seeds", cfg.seeds, top);
  if (j.contains("runs")) {
    std::size_t runs = 0;
    read(j, "runs", runs, top);
    if (!j.contains("seeds")) {
      cfg.seeds.clear();
      for (std::size_t r = 0; r < runs; ++r) cfg.seeds.push_back(r + 1);
    } else if (runs != cfg.seeds.size()) {
      fail(ErrorCode::kInvalidArgument, "config: runs must equal the number of seeds");
    }
  }
  read(j, "oracle_percentile", cfg.oracle_percentile, top);
  read(j, "max_power_iters", cfg.max_power_iters, top);
  if (j.contains("sigma")) {
    const json& s = j.at("sigma");
    if (s.is_string() && s.get<std::string>() == "median") {
      cfg.bandwidth = MedianBandwidth{};
    } else if (s.is_number()) {
      cfg.bandwidth = s.get<double>();
    } else {
      fail(ErrorCode::kInvalidArgument, "config: sigma must be a number or \"median\"");
    }
  }
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    check_keys(d, {"manifest", "synthetic"}, "dataset");
    if (d.contains("manifest") && !d.at("manifest").is_null()) {
      cfg.dataset.manifest = d.at("manifest").get<std::string>();
    }
    if (d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      const std::string where = "dataset.synthetic";
      check_keys(s, {"classes", "videos_per_class", "n_frames", "dim", "cluster_spread",
                     "frame_noise", "seed"},
                 where);
      auto& p = cfg.dataset.synthetic;
      read(s, "classes", p.num_classes, where);
      read(s, "videos_per_class", p.videos_per_class, where);
      read(s, "n_frames", p.n_frames, where);
      read(s, "dim", p.dim, where);
      read(s, "cluster_spread", p.cluster_spread, where);
      read(s, "frame_noise", p.frame_noise, where);
      read(s, "seed", p.seed, where);
    }
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, {"L", "U", "T", "L_oracle", "T_oracle"}, "split");
    read(s, "L", cfg.split.labeled, "split");
    read(s, "U", cfg.split.unlabeled, "split");
    read(s, "T", cfg.split.test, "split");
    read(s, "L_oracle", cfg.split.oracle_train, "split");
    read(s, "T_oracle", cfg.split.oracle_test, "split");
  }
  if (j.contains("base_train")) cfg.base_train = train_from_json(j.at("base_train"), cfg.base_train, "base_train");
  if (j.contains("oracle_train")) {
    cfg.oracle_train = train_from_json(j.at("oracle_train"), cfg.oracle_train, "oracle_train");
  }
  validate(cfg);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["strategy"] = std::string(to_string(cfg.strategy));
  j["b"] = cfg.b;
  j["k"] = cfg.k;
  j["mu"] = cfg.mu;
  j["iterations"] = cfg.iterations;
  j["runs"] = cfg.seeds.size();
  j["seeds"] = cfg.seeds;
  j["oracle_percentile"] = cfg.oracle_percentile;
  j["max_power_iters"] = cfg.max_power_iters;
  if (const double* s = std::get_if<double>(&cfg.bandwidth)) {
    j["sigma"] = *s;
  } else {
    j["sigma"] = "median";
  }
  json d = json::object();
  if (cfg.dataset.manifest) {
    d["manifest"] = cfg.dataset.manifest->string();
  } else {
    const auto& p = cfg.dataset.synthetic;
    d["synthetic"] = {{"classes", p.num_classes},        {"videos_per_class", p.videos_per_class},
                      {"n_frames", p.n_frames},          {"dim", p.dim},
                      {"cluster_spread", p.cluster_spread}, {"frame_noise", p.frame_noise},
                      {"seed", p.seed}};
  }
  j["dataset"] = std::move(d);
  j["split"] = {{"L", cfg.split.labeled},
                {"U", cfg.split.unlabeled},
                {"T", cfg.split.test},
                {"L_oracle", cfg.split.oracle_train},
                {"T_oracle", cfg.split.oracle_test}};
  j["base_train"] = train_to_json(cfg.base_train);
  j["oracle_train"] = train_to_json(cfg.oracle_train);
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    fail(ErrorCode::kIoError, "cannot open config " + path.string());
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::kInvalidArgument, "config " + path.string() + ": " + e.what());
  }
  ExperimentConfig cfg = config_from_json(yaml_to_json(root));
  if (cfg.dataset.manifest && cfg.dataset.manifest->is_relative()) {
    cfg.dataset.manifest = path.parent_path() / *cfg.dataset.manifest;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Loop

RunContext RunContext::build(std::span<const VideoSample> videos, const DatasetSplits& splits) {
  RunContext ctx;
  ctx.videos = videos;
  ctx.num_classes = splits.num_classes;
  if (!videos.empty()) {
    ctx.pooled.resize(static_cast<Eigen::Index>(videos.size()), videos.front().frames.cols());
    for (std::size_t i = 0; i < videos.size(); ++i) {
      ctx.pooled.row(static_cast<Eigen::Index>(i)) = pool_video(videos[i]).transpose();
    }
  }
  ctx.test = splits.test;
  ctx.test_features.resize(static_cast<Eigen::Index>(ctx.test.size()), ctx.pooled.cols());
  for (std::size_t r = 0; r < ctx.test.size(); ++r) {
    ctx.test_features.row(static_cast<Eigen::Index>(r)) = ctx.pooled.row(static_cast<Eigen::Index>(ctx.test[r]));
    ctx.test_labels.push_back(*videos[ctx.test[r]].label);
  }
  return ctx;
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

Model train_on_entries(const RunContext& ctx, std::span<const TrainingEntry> entries,
                       const TrainConfig& cfg) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(entries.size()), ctx.pooled.cols());
  std::vector<int> y;
  y.reserve(entries.size());
  for (std::size_t r = 0; r < entries.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = ctx.pooled.row(static_cast<Eigen::Index>(entries[r].video));
    y.push_back(entries[r].label);
  }
  return train(x, y, ctx.num_classes, cfg);
}

}  // namespace

LearnerState init_learner(const RunContext& ctx, const DatasetSplits& splits,
                          const ExperimentConfig& cfg) {
  LearnerState state;
  for (auto v : splits.labeled) {
    const int y = *ctx.videos[v].label;
    state.labeled.push_back(TrainingEntry{v, y, y, false});
  }
  state.unlabeled = splits.unlabeled;
  state.model = train_on_entries(ctx, state.labeled, cfg.base_train);
  if (cfg.strategy == Strategy::kProposed && !state.unlabeled.empty()) {
    state.diversity = diversity_matrix(rows_of(ctx.pooled, state.unlabeled), cfg.bandwidth);
  }
  return state;
}

SelectionBatch select_batch(const RunContext& ctx, const LearnerState& state,
                            const ExperimentConfig& cfg, std::uint64_t run_seed, int iteration) {
  const std::size_t pool = state.unlabeled.size();
  if (pool == 0) fail(ErrorCode::kFailedPrecondition, "unlabeled pool is empty");
  const std::size_t b = std::min(cfg.b, pool);
  const auto it = static_cast<std::uint64_t>(iteration);

  SelectionBatch batch;
  if (cfg.strategy == Strategy::kRandom) {
    batch.pool_positions = select_videos_random(pool, b, mix_seed(run_seed, kVideoStream + it)).indices;
  } else {
    const Eigen::VectorXd e = entropy_vector(state.model, rows_of(ctx.pooled, state.unlabeled));
    if (cfg.strategy == Strategy::kProposed) {
      if (!state.diversity || state.diversity->size() != pool) {
        fail(ErrorCode::kFailedPrecondition, "diversity matrix out of sync with U");
      }
      const QMatrix q = psd_shift(build_q(e, *state.diversity, cfg.mu));
      PowerResult solved = truncated_power_select(q, b, cfg.max_power_iters);
      batch.pool_positions = solved.selection.indices;
      batch.solver = std::move(solved);
    } else {
      batch.pool_positions = select_videos_entropy(e, b).indices;
    }
  }

  for (auto pos : batch.pool_positions) {
    const std::size_t v = state.unlabeled[pos];
    const Eigen::MatrixXd& frames = ctx.videos[v].frames;
    const std::uint64_t frame_seed = mix_seed(mix_seed(run_seed, kFrameStream + it), v);
    QueryItem item{v, {}};
    switch (cfg.strategy) {
      case Strategy::kProposed:
        item.frames = kcenter_greedy(frames, cfg.k);
        break;
      case Strategy::kRandom:
      case Strategy::kEntropy:
        item.frames = random_frames(static_cast<std::size_t>(frames.rows()), cfg.k, frame_seed);
        break;
      case Strategy::kEntropyKMeans:
        item.frames = kmeans_frames(frames, cfg.k, frame_seed);
        break;
    }
    batch.items.push_back(std::move(item));
  }
  return batch;
}

void apply_answers(const RunContext& ctx, LearnerState& state, const SelectionBatch& batch,
                   std::span<const std::optional<int>> answers) {
  if (answers.size() != batch.items.size()) {
    fail(ErrorCode::kInvalidArgument, "answer count does not match batch size");
  }
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const std::size_t v = batch.items[i].video;
    if (answers[i]) {
      if (*answers[i] < 0 || *answers[i] >= ctx.num_classes) {
        fail(ErrorCode::kOutOfRange, "label " + std::to_string(*answers[i]) + " out of range");
      }
      state.labeled.push_back(TrainingEntry{v, *answers[i], *ctx.videos[v].label, true});
    } else {
      ++state.discarded;
    }
  }
  std::set<std::size_t> removed(batch.pool_positions.begin(), batch.pool_positions.end());
  std::vector<std::size_t> remaining;
  remaining.reserve(state.unlabeled.size() - removed.size());
  for (std::size_t pos = 0; pos < state.unlabeled.size(); ++pos) {
    if (!removed.contains(pos)) remaining.push_back(state.unlabeled[pos]);
  }
  state.unlabeled = std::move(remaining);
  if (state.diversity) {
    state.diversity = prune_diversity(*state.diversity, batch.pool_positions).matrix;
  }
}

double retrain_and_evaluate(const RunContext& ctx, LearnerState& state, const ExperimentConfig& cfg) {
  state.model = train_on_entries(ctx, state.labeled, cfg.base_train);
  return evaluate_accuracy(state.model, ctx.test_features, ctx.test_labels);
}

IterationRecord run_al_iteration(const RunContext& ctx, LearnerState& state,
                                 const ExperimentConfig& cfg, const OracleConfig& oracle,
                                 std::uint64_t run_seed, int iteration) {
  const auto started = std::chrono::steady_clock::now();
  IterationRecord rec;
  rec.iteration = iteration;

  SelectionBatch batch = select_batch(ctx, state, cfg, run_seed, iteration);
  if (batch.solver) rec.objective_trace = batch.solver->objective_trace;

  std::vector<std::optional<int>> answers;
  for (const auto& item : batch.items) {
    const VideoSample& video = ctx.videos[item.video];
    QueryRecord q;
    q.video_id = video.id;
    q.frames = item.frames.indices;
    q.true_label = *video.label;
    q.verdict = query_oracle(oracle, video, item.frames);
    if (q.verdict.labeled()) {
      q.verdict.correct = *q.verdict.label == q.true_label;
      ++(*q.verdict.correct ? rec.correct : rec.incorrect);
    } else {
      ++rec.discarded;
    }
    answers.push_back(q.verdict.label);
    rec.queries.push_back(std::move(q));
  }
  rec.queried = batch.items.size();

  apply_answers(ctx, state, batch, answers);
  rec.test_accuracy = retrain_and_evaluate(ctx, state, cfg);
  rec.labeled_size = state.labeled.size();
  rec.unlabeled_size = state.unlabeled.size();
  rec.wall_clock_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::pair<DatasetSplits, std::uint64_t> split_for_run(std::span<const VideoSample> videos,
                                                      int num_classes, const SplitSizes& sizes,
                                                      std::uint64_t seed) {
  constexpr int kAttempts = 100;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : mix_seed(seed, kSplitStream + static_cast<std::uint64_t>(attempt));
    try {
      return {split_dataset(videos, num_classes, sizes, s), s};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDataError) throw;
    }
  }
  fail(ErrorCode::kDataError, "could not find a split covering every class in L and L_oracle after " +
                                  std::to_string(kAttempts) + " attempts");
}

Dataset materialize_dataset(const ExperimentConfig& cfg) {
  if (cfg.dataset.manifest) return load_dataset(*cfg.dataset.manifest);
  Dataset ds;
  ds.videos = generate_synthetic(cfg.dataset.synthetic);
  ds.num_classes = cfg.dataset.synthetic.num_classes;
  ds.dim = cfg.dataset.synthetic.dim;
  return ds;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  return run_experiment(cfg, materialize_dataset(cfg));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  validate(cfg);
  ExperimentReport report;
  report.config = cfg;
  for (std::size_t r = 0; r < cfg.seeds.size(); ++r) {
    const std::uint64_t seed = cfg.seeds[r];
    auto context = [&](const std::string& what) {
      return "run " + std::to_string(r) + " (seed " + std::to_string(seed) + ")" + what;
    };
    try {
      auto [splits, split_seed] = split_for_run(data.videos, data.num_classes, cfg.split, seed);
      const RunContext ctx = RunContext::build(data.videos, splits);

      // Oracle: trained on L_oracle, threshold from T_oracle.
      const Eigen::MatrixXd oracle_x = rows_of(ctx.pooled, splits.oracle_train);
      std::vector<int> oracle_y;
      for (auto v : splits.oracle_train) oracle_y.push_back(*data.videos[v].label);
      OracleConfig oracle;
      oracle.model = train(oracle_x, oracle_y, data.num_classes, cfg.oracle_train);
      oracle.percentile = cfg.oracle_percentile;
      const Eigen::MatrixXd oracle_test_x = rows_of(ctx.pooled, splits.oracle_test);
      std::vector<int> oracle_test_y;
      for (auto v : splits.oracle_test) oracle_test_y.push_back(*data.videos[v].label);
      oracle.tau = calibrate_threshold(oracle.model, oracle_test_x, cfg.oracle_percentile);

      RunReport run;
      run.seed = seed;
      run.split_seed = split_seed;
      run.tau = oracle.tau;
      run.oracle_accuracy = evaluate_accuracy(oracle.model, oracle_test_x, oracle_test_y);

      LearnerState state = init_learner(ctx, splits, cfg);
      run.initial_accuracy = evaluate_accuracy(state.model, ctx.test_features, ctx.test_labels);
      run.initial_labeled = state.labeled.size();
      run.initial_unlabeled = state.unlabeled.size();
      for (int it = 1; it <= cfg.iterations; ++it) {
        try {
          run.iterations.push_back(run_al_iteration(ctx, state, cfg, oracle, seed, it));
        } catch (const Error& e) {
          fail(e.code(), "iteration " + std::to_string(it) + ": " + e.what());
        }
      }
      report.runs.push_back(std::move(run));
    } catch (const Error& e) {
      fail(e.code(), context(": " + std::string(e.what())));
    }
  }

  for (int it = 0; it <= cfg.iterations; ++it) {
    std::vector<double> acc;
    for (const auto& run : report.runs) {
      acc.push_back(it == 0 ? run.initial_accuracy
                            : run.iterations[static_cast<std::size_t>(it - 1)].test_accuracy);
    }
    auto [mean, sd] = mean_std(acc);
    report.accuracy.push_back(AggregatePoint{it, mean, sd});
  }
  return report;
}

OracleStats summarize_oracle_stats(const ExperimentReport& report) {
  if (report.runs.empty()) fail(ErrorCode::kInvalidArgument, "summarize_oracle_stats: empty report");
  std::vector<double> total, correct, incorrect, discarded;
  for (const auto& run : report.runs) {
    std::size_t q = 0, c = 0, w = 0, d = 0;
    for (const auto& it : run.iterations) {
      q += it.queried;
      c += it.correct;
      w += it.incorrect;
      d += it.discarded;
    }
    if (q == 0) fail(ErrorCode::kInvalidArgument, "summarize_oracle_stats: run with no queries");
    const double scale = 100.0 / static_cast<double>(q);
    total.push_back(static_cast<double>(q));
    correct.push_back(scale * static_cast<double>(c));
    incorrect.push_back(scale * static_cast<double>(w));
    discarded.push_back(scale * static_cast<double>(d));
  }
  OracleStats s;
  s.strategy = report.config.strategy;
  s.total_queried = mean_std(total).first;
  std::tie(s.correct_mean, s.correct_std) = mean_std(correct);
  std::tie(s.incorrect_mean, s.incorrect_std) = mean_std(incorrect);
  std::tie(s.discarded_mean, s.discarded_std) = mean_std(discarded);
  return s;
}

// ---------------------------------------------------------------------------
// Report documents

namespace {

json verdict_to_json(const QueryRecord& q) {
  json j;
  j["video_id"] = q.video_id;
  j["frames"] = q.frames;
  j["outcome"] = q.verdict.labeled() ? "labeled" : "abstained";
  j["label"] = q.verdict.label ? json(*q.verdict.label) : json(nullptr);
  j["entropy"] = q.verdict.oracle_entropy;
  j["correct"] = q.verdict.correct ? json(*q.verdict.correct) : json(nullptr);
  j["true_label"] = q.true_label;
  return j;
}

QueryRecord verdict_from_json(const json& j) {
  QueryRecord q;
  q.video_id = j.at("video_id").get<std::string>();
  q.frames = j.at("frames").get<std::vector<std::size_t>>();
  q.verdict.outcome = j.at("outcome") == "labeled" ? OracleOutcome::kLabeled : OracleOutcome::kAbstained;
  if (!j.at("label").is_null()) q.verdict.label = j.at("label").get<int>();
  q.verdict.oracle_entropy = j.at("entropy").get<double>();
  if (!j.at("correct").is_null()) q.verdict.correct = j.at("correct").get<bool>();
  q.true_label = j.at("true_label").get<int>();
  return q;
}

}  // namespace

json report_to_json(std::span<const ExperimentReport> reports, bool include_timing) {
  json doc;
  doc["format"] = "vidal-report";
  doc["version"] = kReportVersion;
  json experiments = json::array();
  for (const auto& rep : reports) {
    json e;
    e["strategy"] = std::string(to_string(rep.config.strategy));
    e["config"] = config_to_json(rep.config);
    json runs = json::array();
    for (const auto& run : rep.runs) {
      json r;
      r["seed"] = run.seed;
      r["split_seed"] = run.split_seed;
      r["initial_accuracy"] = run.initial_accuracy;
      r["oracle_accuracy"] = run.oracle_accuracy;
      r["tau"] = run.tau;
      r["initial_labeled"] = run.initial_labeled;
      r["initial_unlabeled"] = run.initial_unlabeled;
      json its = json::array();
      for (const auto& it : run.iterations) {
        json i;
        i["iteration"] = it.iteration;
        i["queried"] = it.queried;
        i["correct"] = it.correct;
        i["incorrect"] = it.incorrect;
        i["discarded"] = it.discarded;
        i["test_accuracy"] = it.test_accuracy;
        i["labeled_size"] = it.labeled_size;
        i["unlabeled_size"] = it.unlabeled_size;
        i["objective_trace"] = it.objective_trace;
        json qs = json::array();
        for (const auto& q : it.queries) qs.push_back(verdict_to_json(q));
        i["queries"] = std::move(qs);
        if (include_timing) i["wall_clock_ms"] = it.wall_clock_ms;
        its.push_back(std::move(i));
      }
      r["iterations"] = std::move(its);
      runs.push_back(std::move(r));
    }
    e["runs"] = std::move(runs);
    json agg = json::array();
    for (const auto& p : rep.accuracy) agg.push_back({{"iteration", p.iteration}, {"mean", p.mean}, {"std", p.std}});
    e["accuracy"] = std::move(agg);
    experiments.push_back(std::move(e));
  }
  doc["experiments"] = std::move(experiments);
  return doc;
}

std::vector<ExperimentReport> report_from_json(const json& doc) {
  if (doc.value("format", "") != "vidal-report" || doc.value("version", 0) != kReportVersion) {
    fail(ErrorCode::kDataError, "not a version 1 vidal report");
  }
  std::vector<ExperimentReport> out;
  try {
    for (const auto& e : doc.at("experiments")) {
      ExperimentReport rep;
      rep.config = config_from_json(e.at("config"));
      for (const auto& r : e.at("runs")) {
        RunReport run;
        run.seed = r.at("seed").get<std::uint64_t>();
        run.split_seed = r.at("split_seed").get<std::uint64_t>();
        run.initial_accuracy = r.at("initial_accuracy").get<double>();
        run.oracle_accuracy = r.at("oracle_accuracy").get<double>();
        run.tau = r.at("tau").get<double>();
        run.initial_labeled = r.at("initial_labeled").get<std::size_t>();
        run.initial_unlabeled = r.at("initial_unlabeled").get<std::size_t>();
        for (const auto& i : r.at("iterations")) {
          IterationRecord it;
          it.iteration = i.at("iteration").get<int>();
          it.queried = i.at("queried").get<std::size_t>();
          it.correct = i.at("correct").get<std::size_t>();
          it.incorrect = i.at("incorrect").get<std::size_t>();
          it.discarded = i.at("discarded").get<std::size_t>();
          it.test_accuracy = i.at("test_accuracy").get<double>();
          it.labeled_size = i.at("labeled_size").get<std::size_t>();
          it.unlabeled_size = i.at("unlabeled_size").get<std::size_t>();
          it.objective_trace = i.at("objective_trace").get<std::vector<double>>();
          for (const auto& q : i.at("queries")) it.queries.push_back(verdict_from_json(q));
          it.wall_clock_ms = i.value("wall_clock_ms", 0.0);
          run.iterations.push_back(std::move(it));
        }
        rep.runs.push_back(std::move(run));
      }
      for (const auto& p : e.at("accuracy")) {
        rep.accuracy.push_back(
            AggregatePoint{p.at("iteration").get<int>(), p.at("mean").get<double>(), p.at("std").get<double>()});
      }
      out.push_back(std::move(rep));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kDataError, std::string("malformed report: ") + e.what());
  }
  return out;
}

std::string accuracy_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "iteration,strategy,mean,std\n";
  for (const auto& rep : reports) {
    for (const auto& p : rep.accuracy) {
      os << p.iteration << ',' << to_string(rep.config.strategy) << ',' << p.mean << ',' << p.std << '\n';
    }
  }
  return os.str();
}

std::string oracle_stats_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "strategy,total_queried,correct_mean,correct_std,incorrect_mean,incorrect_std,"
        "discarded_mean,discarded_std\n";
  for (const auto& rep : reports) {
    const OracleStats s = summarize_oracle_stats(rep);
    os << to_string(s.strategy) << ',' << s.total_queried << ',' << s.correct_mean << ','
       << s.correct_std << ',' << s.incorrect_mean << ',' << s.incorrect_std << ','
       << s.discarded_mean << ',' << s.discarded_std << '\n';
  }
  return os.str();
}

}  // namespace vidal
