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

#include "vidal/http_server.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

#include "vidal/error.hpp"

namespace vidal {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kFailedPrecondition:
      return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kOutOfRange:
    case ErrorCode::kDataError:
      return 400;
    case ErrorCode::kNumericError:
    case ErrorCode::kIoError:
      return 500;
  }
  return 500;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status_for(code), {{"code", std::string(to_string(code))}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

std::string content_type_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  return "application/octet-stream";
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::kInvalidArgument, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::kIoError, e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  AnnotationService& service;
  httplib::Server server;

  explicit Impl(AnnotationService& s) : service(s) {}
};

HttpServer::HttpServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;

  srv.Post("/v1/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             if (!body.contains("dataset") || !body.at("dataset").is_string()) {
               fail(ErrorCode::kInvalidArgument, "field 'dataset' (manifest path) is required");
             }
             const ExperimentConfig cfg = config_from_json(body.value("config", json::object()));
             const std::string id = svc.create_session(cfg, body.at("dataset").get<std::string>());
             json out = to_json(svc.session_status(id));
             out["id"] = id;
             send_json(res, 201, out);
           }));

  srv.Get(R"(/v1/sessions/([^/]+)/next)",
          guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, to_json(svc.next_query(req.matches[1])));
          }));

  srv.Post(R"(/v1/sessions/([^/]+)/labels)",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             if (!body.contains("video_id") || !body.at("video_id").is_string()) {
               fail(ErrorCode::kInvalidArgument, "field 'video_id' is required");
             }
             const json& v = body.value("verdict", json());
             std::optional<int> label;
             if (v.is_number_integer()) {
               label = v.get<int>();
             } else if (!(v.is_string() && v.get<std::string>() == "abstain")) {
               fail(ErrorCode::kInvalidArgument, "verdict must be a class index or \"abstain\"");
             }
             const SubmitResult r = svc.submit_label(req.matches[1], body.at("video_id").get<std::string>(), label);
             send_json(res, 200,
                       {{"accepted", true}, {"status", std::string(to_string(r.status))}, {"remaining", r.remaining}});
           }));

  srv.Get(R"(/v1/sessions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            json out = to_json(svc.session_status(req.matches[1]));
            out["id"] = std::string(req.matches[1]);
            send_json(res, 200, out);
          }));

  srv.Get(R"(/v1/assets/([^/]+)/(.+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const auto path = svc.asset_path(req.matches[1], req.matches[2]);
            std::ifstream in(path, std::ios::binary);
            std::ostringstream bytes;
            bytes << in.rdbuf();
            res.status = 200;
            res.set_content(bytes.str(), content_type_for(path));
          }));

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(json{{"code", res.status == 404 ? "not_found" : "http_error"},
                           {"message", "no such endpoint"}}.dump(),
                      "application/json");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace vidal
