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

#include <fstream>
#include <thread>

#include "test_util.hpp"
#include "vidal/annotation_service.hpp"
#include "vidal/error.hpp"
#include "vidal/http_server.hpp"

// After Eigen: <resolv.h> defines a _res macro that collides with Eigen internals.
#include <httplib.h>

using namespace vidal;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ExperimentConfig session_config() {
  ExperimentConfig cfg;
  cfg.b = 4;
  cfg.k = 3;
  cfg.iterations = 2;
  cfg.seeds = {5};
  cfg.split = {12, 30, 15, 24, 9};
  cfg.base_train.epochs = 50;
  cfg.oracle_train.epochs = 50;
  return cfg;
}

// Writes a 3-class manifest with one tiny asset file per frame.
fs::path write_manifest(const fs::path& dir, bool with_assets = true) {
  SyntheticParams p;
  p.num_classes = 3;
  p.videos_per_class = 30;
  p.n_frames = 8;
  p.dim = 5;
  p.seed = 12;
  Dataset ds;
  ds.videos = generate_synthetic(p);
  ds.num_classes = 3;
  ds.dim = 5;
  if (with_assets) {
    for (auto& v : ds.videos) {
      fs::create_directories(dir / "frames" / v.id);
      for (int f = 0; f < p.n_frames; ++f) {
        const std::string rel = "frames/" + v.id + "/" + std::to_string(f) + ".txt";
        std::ofstream(dir / rel) << v.id << ':' << f;
        v.frame_assets.push_back(rel);
      }
    }
  }
  fs::create_directories(dir);
  const fs::path manifest = dir / "videos.jsonl";
  write_dataset(ds, manifest);
  return manifest;
}

// Answers every query with the first class until the session finishes.
void drive_to_end(AnnotationService& svc, const std::string& id) {
  while (svc.session_status(id).status != SessionStatus::kFinished) {
    const QueryView q = svc.next_query(id);
    svc.submit_label(id, q.video_id, 0);
  }
}

}  // namespace

TEST_CASE("session lifecycle") {
  const fs::path dir = test::scratch_dir("svc-lifecycle");
  const fs::path manifest = write_manifest(dir);
  AnnotationService svc(dir / "state");
  const std::string id = svc.create_session(session_config(), manifest);

  StatusView s = svc.session_status(id);
  CHECK(s.status == SessionStatus::kAwaitingLabels);
  CHECK(s.queue_length == 4);
  CHECK(s.labeled_pool == 12);
  CHECK(s.unlabeled_pool == 30);

  const QueryView q1 = svc.next_query(id);
  const QueryView again = svc.next_query(id);
  CHECK(again.video_id == q1.video_id);
  CHECK(q1.frame_indices.size() == 3);
  CHECK(q1.classes == std::vector<std::string>{"class 0", "class 1", "class 2"});
  REQUIRE(q1.frame_urls.size() == 3);
  CHECK(q1.frame_urls[0].rfind("/v1/assets/" + id + "/frames/" + q1.video_id + "/", 0) == 0);
  CHECK(q1.progress.iteration == 1);
  CHECK(q1.progress.position == 0);

  const SubmitResult r1 = svc.submit_label(id, q1.video_id, 2);
  CHECK(r1.remaining == 3);
  CHECK(r1.status == SessionStatus::kAwaitingLabels);

  try {
    svc.submit_label(id, q1.video_id, 1);
    FAIL("duplicate accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConflict);
  }
  CHECK_THROWS_AS(svc.submit_label(id, "no-such-video", 1), Error);
  CHECK_THROWS_AS(svc.submit_label(id, svc.next_query(id).video_id, 3), Error);
  CHECK_THROWS_AS(svc.next_query("missing"), Error);

  const QueryView q2 = svc.next_query(id);
  CHECK(q2.video_id != q1.video_id);
  CHECK(q2.progress.position == 1);
  svc.submit_label(id, q2.video_id, std::nullopt);
  svc.submit_label(id, svc.next_query(id).video_id, 0);
  const SubmitResult end1 = svc.submit_label(id, svc.next_query(id).video_id, 1);
  CHECK(end1.status == SessionStatus::kAwaitingLabels);
  CHECK(end1.remaining == 4);

  s = svc.session_status(id);
  CHECK(s.iteration == 1);
  CHECK(s.labeled == 3);
  CHECK(s.abstained == 1);
  CHECK(s.labeled_pool == 15);
  CHECK(s.unlabeled_pool == 26);
  CHECK(s.accuracy.size() == 1);

  drive_to_end(svc, id);
  s = svc.session_status(id);
  CHECK(s.status == SessionStatus::kFinished);
  CHECK(s.accuracy.size() == 2);
  CHECK(s.queue_length == 0);
  CHECK_THROWS_AS(svc.next_query(id), Error);
  CHECK_THROWS_AS(svc.submit_label(id, q1.video_id, 0), Error);

  // Asset resolution stays inside the dataset directory.
  CHECK(fs::exists(svc.asset_path(id, "frames/" + q1.video_id + "/0.txt")));
  CHECK_THROWS_AS(svc.asset_path(id, "../videos.jsonl"), Error);
  CHECK_THROWS_AS(svc.asset_path(id, "frames/none.txt"), Error);
  fs::remove_all(dir);
}

TEST_CASE("session creation checks") {
  const fs::path dir = test::scratch_dir("svc-create");
  AnnotationService svc(dir / "state");
  try {
    svc.create_session(session_config(), write_manifest(dir, false));
    FAIL("manifest without assets accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFailedPrecondition);
  }
  ExperimentConfig bad = session_config();
  bad.b = 0;
  CHECK_THROWS_AS(svc.create_session(bad, write_manifest(dir)), Error);
  CHECK_THROWS_AS(svc.create_session(session_config(), dir / "absent.jsonl"), Error);
  fs::remove_all(dir);
}

TEST_CASE("batch larger than the pool") {
  const fs::path dir = test::scratch_dir("svc-bigb");
  AnnotationService svc(dir / "state");
  ExperimentConfig cfg = session_config();
  cfg.b = 100;
  cfg.iterations = 3;
  const std::string id = svc.create_session(cfg, write_manifest(dir));
  CHECK(svc.session_status(id).queue_length == 30);
  drive_to_end(svc, id);
  const StatusView s = svc.session_status(id);
  CHECK(s.unlabeled_pool == 0);
  CHECK(s.iteration == 1);
  fs::remove_all(dir);
}

TEST_CASE("recovery replays the audit log") {
  const fs::path dir = test::scratch_dir("svc-recover");
  const fs::path manifest = write_manifest(dir);
  std::string id;
  StatusView before;
  LearnerState learner;
  std::string head;
  {
    AnnotationService svc(dir / "state");
    id = svc.create_session(session_config(), manifest);
    for (int i = 0; i < 6; ++i) {
      const QueryView q = svc.next_query(id);
      svc.submit_label(id, q.video_id, i % 3 == 1 ? std::nullopt : std::optional<int>(i % 3));
    }
    before = svc.session_status(id);
    learner = svc.learner_snapshot(id);
    head = svc.next_query(id).video_id;
  }
  // A torn trailing record is dropped.
  std::ofstream(dir / "state" / (id + ".log"), std::ios::app) << "{\"type\":\"lab";

  AnnotationService svc(dir / "state");
  CHECK(svc.recover() == 1);
  const StatusView after = svc.session_status(id);
  CHECK(after.iteration == before.iteration);
  CHECK(after.labeled == before.labeled);
  CHECK(after.abstained == before.abstained);
  CHECK(after.accuracy == before.accuracy);
  CHECK(after.queue_length == before.queue_length);
  CHECK(svc.next_query(id).video_id == head);
  const LearnerState restored = svc.learner_snapshot(id);
  CHECK(restored.unlabeled == learner.unlabeled);
  CHECK(restored.model.weights == learner.model.weights);
  fs::remove_all(dir);
}

TEST_CASE("a scripted annotator reproduces the simulated experiment") {
  const fs::path dir = test::scratch_dir("svc-equiv");
  const fs::path manifest = write_manifest(dir);
  ExperimentConfig cfg = session_config();
  cfg.dataset.manifest = manifest;

  const Dataset data = materialize_dataset(cfg);
  const ExperimentReport rep = run_experiment(cfg, data);

  // Rebuild the simulated oracle and let it answer through the service.
  const auto [splits, split_seed] = split_for_run(data.videos, data.num_classes, cfg.split, cfg.seeds[0]);
  const Eigen::MatrixXd ox = pooled_features(data.videos, splits.oracle_train);
  std::vector<int> oy;
  for (auto v : splits.oracle_train) oy.push_back(*data.videos[v].label);
  OracleConfig oracle;
  oracle.model = train(ox, oy, data.num_classes, cfg.oracle_train);
  oracle.tau = calibrate_threshold(oracle.model, pooled_features(data.videos, splits.oracle_test),
                                   cfg.oracle_percentile);
  CHECK(oracle.tau == rep.runs[0].tau);

  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < data.videos.size(); ++i) by_id[data.videos[i].id] = i;

  AnnotationService svc(dir / "state");
  const std::string id = svc.create_session(cfg, manifest);
  std::vector<std::string> asked;
  while (svc.session_status(id).status != SessionStatus::kFinished) {
    const QueryView q = svc.next_query(id);
    asked.push_back(q.video_id);
    const OracleVerdict v = query_oracle(oracle, data.videos[by_id.at(q.video_id)], FrameSubset{q.frame_indices, 0.0});
    svc.submit_label(id, q.video_id, v.label);
  }

  std::vector<std::string> expected;
  std::vector<double> expected_acc;
  for (const auto& it : rep.runs[0].iterations) {
    for (const auto& qr : it.queries) expected.push_back(qr.video_id);
    expected_acc.push_back(it.test_accuracy);
  }
  CHECK(asked == expected);
  CHECK(svc.session_status(id).accuracy == expected_acc);
  fs::remove_all(dir);
}

TEST_CASE("independent sessions run concurrently") {
  const fs::path dir = test::scratch_dir("svc-concurrent");
  const fs::path manifest = write_manifest(dir);
  AnnotationService svc(dir / "state");
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(svc.create_session(session_config(), manifest));
  std::vector<std::thread> workers;
  for (const auto& id : ids) workers.emplace_back([&svc, id] { drive_to_end(svc, id); });
  // Status reads proceed while sessions train.
  for (int i = 0; i < 50; ++i)
    for (const auto& id : ids) CHECK(svc.session_status(id).iterations == 2);
  for (auto& w : workers) w.join();
  const auto first = svc.session_status(ids[0]).accuracy;
  for (const auto& id : ids) {
    CHECK(svc.session_status(id).status == SessionStatus::kFinished);
    CHECK(svc.session_status(id).accuracy == first);
  }
  fs::remove_all(dir);
}

TEST_CASE("HTTP interface") {
  const fs::path dir = test::scratch_dir("svc-http");
  const fs::path manifest = write_manifest(dir);
  AnnotationService svc(dir / "state");
  HttpServer server(svc);
  const int port = server.bind_any_port();
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen_after_bind(); });
  struct Joiner {
    HttpServer& s;
    std::thread& t;
    ~Joiner() {
      s.stop();
      if (t.joinable()) t.join();
    }
  } joiner{server, loop};
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  const json create{{"config", config_to_json(session_config())}, {"dataset", manifest.string()}};
  auto res = cli.Post("/v1/sessions", create.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  const json created = json::parse(res->body);
  const std::string id = created.at("id");
  CHECK(created.at("status") == "awaiting_labels");
  CHECK(created.at("queue_length") == 4);

  res = cli.Get("/v1/sessions/" + id + "/next");
  REQUIRE(res);
  CHECK(res->status == 200);
  const json q = json::parse(res->body);
  const std::string video = q.at("video_id");
  CHECK(q.at("frame_urls").size() == 3);
  CHECK(q.at("progress").at("batch_size") == 4);

  res = cli.Get(q.at("frame_urls")[0].get<std::string>());
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body.rfind(video + ":", 0) == 0);

  res = cli.Post("/v1/sessions/" + id + "/labels", json{{"video_id", video}, {"verdict", 1}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body).at("remaining") == 3);

  res = cli.Post("/v1/sessions/" + id + "/labels", json{{"video_id", video}, {"verdict", 1}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  CHECK(json::parse(res->body).contains("message"));

  const std::string next = json::parse(cli.Get("/v1/sessions/" + id + "/next")->body).at("video_id");
  res = cli.Post("/v1/sessions/" + id + "/labels", json{{"video_id", next}, {"verdict", "abstain"}}.dump(), "application/json");
  CHECK(res->status == 200);
  res = cli.Post("/v1/sessions/" + id + "/labels", json{{"video_id", next}, {"verdict", "maybe"}}.dump(), "application/json");
  CHECK(res->status == 400);
  res = cli.Post("/v1/sessions/" + id + "/labels", "{not json", "application/json");
  CHECK(res->status == 400);

  res = cli.Get("/v1/sessions/" + id);
  REQUIRE(res);
  const json st = json::parse(res->body);
  CHECK(st.at("counts").at("labeled") == 1);
  CHECK(st.at("counts").at("abstained") == 1);
  CHECK(st.at("queue_length") == 2);

  CHECK(cli.Get("/v1/sessions/nope")->status == 404);
  CHECK(cli.Get("/v1/assets/" + id + "/..%2Fvideos.jsonl")->status == 404);
  CHECK(cli.Get("/v1/unknown")->status == 404);

  const json no_assets{{"config", config_to_json(session_config())}, {"dataset", write_manifest(dir / "bare", false).string()}};
  CHECK(cli.Post("/v1/sessions", no_assets.dump(), "application/json")->status == 409);

  fs::remove_all(dir);
}

TEST_CASE("error codes map to HTTP statuses") {
  CHECK(http_status_for(ErrorCode::kNotFound) == 404);
  CHECK(http_status_for(ErrorCode::kConflict) == 409);
  CHECK(http_status_for(ErrorCode::kFailedPrecondition) == 409);
  CHECK(http_status_for(ErrorCode::kInvalidArgument) == 400);
  CHECK(http_status_for(ErrorCode::kIoError) == 500);
}
