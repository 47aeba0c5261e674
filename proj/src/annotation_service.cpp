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

#include "vidal/annotation_service.hpp"

#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "vidal/error.hpp"
#include "vidal/random.hpp"

namespace vidal {

using nlohmann::json;

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::kSelecting:
      return "selecting";
    case SessionStatus::kAwaitingLabels:
      return "awaiting_labels";
    case SessionStatus::kTraining:
      return "training";
    case SessionStatus::kFinished:
      return "finished";
  }
  return "unknown";
}

json to_json(const QueryView& q) {
  return {{"video_id", q.video_id},
          {"frame_indices", q.frame_indices},
          {"frame_urls", q.frame_urls},
          {"classes", q.classes},
          {"progress",
           {{"iteration", q.progress.iteration},
            {"position", q.progress.position},
            {"batch_size", q.progress.batch_size},
            {"labeled", q.progress.labeled},
            {"abstained", q.progress.abstained}}}};
}

json to_json(const StatusView& s) {
  return {{"status", std::string(to_string(s.status))},
          {"iteration", s.iteration},
          {"iterations", s.iterations},
          {"counts", {{"labeled", s.labeled}, {"abstained", s.abstained}}},
          {"queue_length", s.queue_length},
          {"labeled_pool", s.labeled_pool},
          {"unlabeled_pool", s.unlabeled_pool},
          {"accuracy", s.accuracy}};
}

// ---------------------------------------------------------------------------

class AnnotationService::Session {
 public:
  Session(std::string id, ExperimentConfig cfg, Dataset data, std::filesystem::path log_path,
          std::string url_prefix)
      : id_(std::move(id)),
        cfg_(std::move(cfg)),
        data_(std::move(data)),
        log_path_(std::move(log_path)),
        url_prefix_(std::move(url_prefix)) {
    seed_ = cfg_.seeds.front();
    auto split = split_for_run(data_.videos, data_.num_classes, cfg_.split, seed_);
    splits_ = std::move(split.first);
    ctx_ = RunContext::build(data_.videos, splits_);
    state_ = init_learner(ctx_, splits_, cfg_);
    for (int c = 0; c < data_.num_classes; ++c) classes_.push_back("class " + std::to_string(c));
    begin_iteration();
  }

  const std::string& id() const { return id_; }
  const std::filesystem::path& base_dir() const { return data_.base_dir; }

  QueryView next_query() const {
    std::lock_guard lock(snapshot_mu_);
    if (snapshot_status_.status != SessionStatus::kAwaitingLabels || !snapshot_query_) {
      fail(ErrorCode::kFailedPrecondition,
           "session " + id_ + " is " + std::string(to_string(snapshot_status_.status)) +
               ", no query pending");
    }
    return *snapshot_query_;
  }

  StatusView status() const {
    std::lock_guard lock(snapshot_mu_);
    return snapshot_status_;
  }

  LearnerState learner() const {
    std::lock_guard lock(write_mu_);
    return state_;
  }

  SubmitResult submit(const std::string& video_id, std::optional<int> label, bool log) {
    std::lock_guard lock(write_mu_);
    if (status_ != SessionStatus::kAwaitingLabels) {
      fail(ErrorCode::kFailedPrecondition,
           "session " + id_ + " is " + std::string(to_string(status_)) + ", not accepting labels");
    }
    std::size_t slot = batch_.items.size();
    for (std::size_t i = 0; i < batch_.items.size(); ++i) {
      if (data_.videos[batch_.items[i].video].id == video_id) slot = i;
    }
    if (slot == batch_.items.size()) {
      if (answered_ids_.contains(video_id)) {
        fail(ErrorCode::kConflict, "video '" + video_id + "' was already answered");
      }
      fail(ErrorCode::kNotFound, "video '" + video_id + "' is not in the pending queue");
    }
    if (answered_[slot]) fail(ErrorCode::kConflict, "video '" + video_id + "' was already answered");
    if (label && (*label < 0 || *label >= data_.num_classes)) {
      fail(ErrorCode::kOutOfRange, "label " + std::to_string(*label) + " outside [0, " +
                                       std::to_string(data_.num_classes) + ")");
    }

    if (log) {
      append_log({{"type", "label"},
                  {"video_id", video_id},
                  {"verdict", label ? json(*label) : json("abstain")}});
    }
    answered_[slot] = true;
    answers_[slot] = label;
    answered_ids_.insert(video_id);
    ++(label ? human_labeled_ : human_abstained_);

    if (pending() == 0) {
      status_ = SessionStatus::kTraining;
      publish();
      apply_answers(ctx_, state_, batch_, answers_);
      accuracy_.push_back(retrain_and_evaluate(ctx_, state_, cfg_));
      ++completed_;
      if (completed_ >= cfg_.iterations || state_.unlabeled.empty()) {
        status_ = SessionStatus::kFinished;
        batch_ = {};
        answers_.clear();
        answered_.clear();
      } else {
        begin_iteration();
      }
    }
    publish();
    return SubmitResult{status_, pending()};
  }

  void append_log(const json& record) const {
    std::ofstream out(log_path_, std::ios::app);
    out << record.dump() << '\n';
    out.flush();
    if (!out) fail(ErrorCode::kIoError, "cannot append to audit log " + log_path_.string());
  }

 private:
  std::size_t pending() const {
    std::size_t n = 0;
    for (bool a : answered_) n += a ? 0 : 1;
    return n;
  }

  void begin_iteration() {
    status_ = SessionStatus::kSelecting;
    publish();
    batch_ = select_batch(ctx_, state_, cfg_, seed_, completed_ + 1);
    answers_.assign(batch_.items.size(), std::nullopt);
    answered_.assign(batch_.items.size(), false);
    status_ = SessionStatus::kAwaitingLabels;
    publish();
  }

  std::optional<QueryView> head_query() const {
    if (status_ != SessionStatus::kAwaitingLabels) return std::nullopt;
    for (std::size_t i = 0; i < batch_.items.size(); ++i) {
      if (answered_[i]) continue;
      const auto& item = batch_.items[i];
      const VideoSample& video = data_.videos[item.video];
      QueryView q;
      q.video_id = video.id;
      q.frame_indices = item.frames.indices;
      for (auto f : item.frames.indices) {
        q.frame_urls.push_back(url_prefix_ + "/" + id_ + "/" + video.frame_assets[f]);
      }
      q.classes = classes_;
      q.progress = QueryProgress{completed_ + 1, batch_.items.size() - pending(), batch_.items.size(),
                                 human_labeled_, human_abstained_};
      return q;
    }
    return std::nullopt;
  }

  void publish() {
    StatusView s;
    s.status = status_;
    s.iteration = completed_;
    s.iterations = cfg_.iterations;
    s.labeled = human_labeled_;
    s.abstained = human_abstained_;
    s.queue_length = status_ == SessionStatus::kAwaitingLabels ? pending() : 0;
    s.labeled_pool = state_.labeled.size();
    s.unlabeled_pool = state_.unlabeled.size();
    s.accuracy = accuracy_;
    auto q = head_query();
    std::lock_guard lock(snapshot_mu_);
    snapshot_status_ = std::move(s);
    snapshot_query_ = std::move(q);
  }

  std::string id_;
  ExperimentConfig cfg_;
  Dataset data_;
  std::filesystem::path log_path_;
  std::string url_prefix_;
  std::uint64_t seed_ = 0;
  DatasetSplits splits_;
  RunContext ctx_;
  std::vector<std::string> classes_;

  // Guarded by write_mu_.
  mutable std::mutex write_mu_;
  LearnerState state_;
  SelectionBatch batch_;
  std::vector<std::optional<int>> answers_;
  std::vector<bool> answered_;
  std::set<std::string> answered_ids_;
  SessionStatus status_ = SessionStatus::kSelecting;
  int completed_ = 0;
  std::size_t human_labeled_ = 0;
  std::size_t human_abstained_ = 0;
  std::vector<double> accuracy_;

  // Read path; never held while training.
  mutable std::mutex snapshot_mu_;
  StatusView snapshot_status_;
  std::optional<QueryView> snapshot_query_;
};

// ---------------------------------------------------------------------------

AnnotationService::AnnotationService(std::filesystem::path state_dir, std::string asset_url_prefix)
    : state_dir_(std::move(state_dir)), asset_url_prefix_(std::move(asset_url_prefix)) {
  std::filesystem::create_directories(state_dir_);
  next_id_ = std::random_device{}();
}

AnnotationService::~AnnotationService() = default;

std::shared_ptr<AnnotationService::Session> AnnotationService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<AnnotationService::Session> AnnotationService::open_session(
    const std::string& id, ExperimentConfig cfg, const std::filesystem::path& manifest) {
  cfg.strategy = Strategy::kProposed;
  validate(cfg);
  Dataset data = load_dataset(manifest);
  for (const auto& v : data.videos) {
    if (!v.has_assets()) {
      fail(ErrorCode::kFailedPrecondition,
           "video '" + v.id + "' has no frame_assets; live annotation needs displayable frames");
    }
  }
  return std::make_shared<Session>(id, std::move(cfg), std::move(data), state_dir_ / (id + ".log"),
                                   asset_url_prefix_);
}

std::string AnnotationService::create_session(ExperimentConfig cfg,
                                              const std::filesystem::path& manifest) {
  const auto absolute = std::filesystem::absolute(manifest);
  std::string id;
  {
    std::unique_lock lock(sessions_mu_);
    do {
      std::ostringstream os;
      os << 's' << std::hex << (mix_seed(next_id_++, 0) & 0xffffffffffffULL);
      id = os.str();
    } while (sessions_.contains(id) || std::filesystem::exists(state_dir_ / (id + ".log")));
  }
  cfg.strategy = Strategy::kProposed;
  auto session = open_session(id, cfg, absolute);
  session->append_log({{"type", "create"},
                       {"session", id},
                       {"manifest", absolute.string()},
                       {"config", config_to_json(cfg)}});
  std::unique_lock lock(sessions_mu_);
  sessions_.emplace(id, std::move(session));
  return id;
}

QueryView AnnotationService::next_query(const std::string& session) const {
  return find(session)->next_query();
}

SubmitResult AnnotationService::submit_label(const std::string& session, const std::string& video_id,
                                             std::optional<int> label) {
  return find(session)->submit(video_id, label, true);
}

StatusView AnnotationService::session_status(const std::string& session) const {
  return find(session)->status();
}

LearnerState AnnotationService::learner_snapshot(const std::string& session) const {
  return find(session)->learner();
}

std::filesystem::path AnnotationService::asset_path(const std::string& session,
                                                    const std::string& relative) const {
  const auto s = find(session);
  const std::filesystem::path rel(relative);
  if (rel.empty() || rel.is_absolute()) fail(ErrorCode::kNotFound, "invalid asset path");
  for (const auto& part : rel) {
    if (part == "..") fail(ErrorCode::kNotFound, "asset path escapes the dataset directory");
  }
  const auto full = s->base_dir() / rel;
  if (!std::filesystem::is_regular_file(full)) {
    fail(ErrorCode::kNotFound, "asset '" + relative + "' not found");
  }
  return full;
}

std::size_t AnnotationService::recover() {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(state_dir_)) {
    if (entry.path().extension() != ".log") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::shared_ptr<Session> session;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::parse_error&) {
        // A torn final write from a crash is dropped; anything earlier is corruption.
        if (in.peek() == std::char_traits<char>::eof()) break;
        fail(ErrorCode::kDataError, entry.path().string() + ":" + std::to_string(line_no) +
                                        ": malformed audit record");
      }
      const std::string type = rec.value("type", "");
      if (type == "create") {
        session = open_session(rec.at("session").get<std::string>(),
                               config_from_json(rec.at("config")),
                               rec.at("manifest").get<std::string>());
      } else if (type == "label" && session) {
        const json& v = rec.at("verdict");
        std::optional<int> label;
        if (v.is_number_integer()) label = v.get<int>();
        session->submit(rec.at("video_id").get<std::string>(), label, false);
      } else {
        fail(ErrorCode::kDataError, entry.path().string() + ":" + std::to_string(line_no) +
                                        ": unexpected audit record");
      }
    }
    if (session) {
      std::unique_lock lock(sessions_mu_);
      sessions_[session->id()] = session;
      ++count;
    }
  }
  return count;
}

}  // namespace vidal
