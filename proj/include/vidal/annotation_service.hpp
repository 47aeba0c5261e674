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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vidal/harness.hpp"

namespace vidal {

enum class SessionStatus { kSelecting, kAwaitingLabels, kTraining, kFinished };

std::string_view to_string(SessionStatus s);

struct QueryProgress {
  int iteration = 0;        // 1-based iteration the query belongs to
  std::size_t position = 0;  // answered so far in this batch
  std::size_t batch_size = 0;
  std::size_t labeled = 0;
  std::size_t abstained = 0;
};

struct QueryView {
  std::string video_id;
  std::vector<std::size_t> frame_indices;
  std::vector<std::string> frame_urls;
  std::vector<std::string> classes;
  QueryProgress progress;
};

struct StatusView {
  SessionStatus status = SessionStatus::kSelecting;
  int iteration = 0;  // completed iterations
  int iterations = 0;
  std::size_t labeled = 0;    // human labels accepted
  std::size_t abstained = 0;  // human abstentions
  std::size_t queue_length = 0;
  std::size_t labeled_pool = 0;    // |L|
  std::size_t unlabeled_pool = 0;  // |U|
  std::vector<double> accuracy;    // test accuracy after each completed iteration
};

struct SubmitResult {
  SessionStatus status = SessionStatus::kAwaitingLabels;
  std::size_t remaining = 0;
};

nlohmann::json to_json(const QueryView& q);
nlohmann::json to_json(const StatusView& s);

/// Live-annotation sessions: a human replaces the simulated oracle. Every
/// session runs the proposed strategy with seed cfg.seeds[0]. Creations and
/// submissions are appended to `<state_dir>/<id>.log` before they take
/// effect, and recover() replays those logs.
class AnnotationService {
 public:
  explicit AnnotationService(std::filesystem::path state_dir,
                             std::string asset_url_prefix = "/v1/assets");
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  std::string create_session(ExperimentConfig cfg, const std::filesystem::path& manifest);

  /// Head of the pending queue; does not consume it.
  QueryView next_query(const std::string& session) const;

  /// `label` empty means abstain.
  SubmitResult submit_label(const std::string& session, const std::string& video_id,
                            std::optional<int> label);

  StatusView session_status(const std::string& session) const;

  /// Resolves an asset path under the session's manifest directory. Throws
  /// kNotFound for unknown sessions or paths outside that directory.
  std::filesystem::path asset_path(const std::string& session, const std::string& relative) const;

  /// Rebuilds every session found in the state directory; returns the count.
  std::size_t recover();

  /// Learner state of a session (for inspection and tests).
  LearnerState learner_snapshot(const std::string& session) const;

 private:
  class Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> open_session(const std::string& id, ExperimentConfig cfg,
                                        const std::filesystem::path& manifest);

  std::filesystem::path state_dir_;
  std::string asset_url_prefix_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace vidal
