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

#include <memory>
#include <string>

#include "vidal/annotation_service.hpp"
#include "vidal/error.hpp"

namespace vidal {

/// HTTP+JSON front of AnnotationService. Routes, all under /v1:
///   POST /sessions                 {"config": {...}, "dataset": "<manifest>"}
///   GET  /sessions/{id}/next
///   POST /sessions/{id}/labels     {"video_id": "...", "verdict": <int> | "abstain"}
///   GET  /sessions/{id}
///   GET  /assets/{session}/{path}
/// Errors are {"code": ..., "message": ...} with a matching HTTP status.
class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to an ephemeral port and returns it, or -1 on failure.
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int http_status_for(ErrorCode code);

}  // namespace vidal
