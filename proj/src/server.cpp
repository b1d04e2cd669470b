// Copyright 2026 The divclust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "divclust/server.hpp"

#include <charconv>

#include <httplib.h>
#include <json.hpp>

#include "divclust/error.hpp"

namespace divclust::server {

using nlohmann::json;
using session::ApiError;

namespace {

constexpr const char* kJson = "application/json";

std::string status_code_name(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 405: return "method_not_allowed";
    case 409: return "conflict";
    case 413: return "payload_too_large";
    case 422: return "unprocessable";
    default: return status >= 500 ? "internal" : "error";
  }
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  res.status = status;
  res.set_content(json{{"code", code}, {"message", message}, {"status", status}}.dump(), kJson);
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const json::exception& e) {
    throw ApiError(400, "bad_request", std::string("body is not valid JSON: ") + e.what());
  }
}

tree::NodeId parse_node(const std::string& text) {
  tree::NodeId id = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ApiError(404, "not_found", "unknown node '" + text + "'");
  }
  return id;
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes"; }

// Runs a handler and turns exceptions into JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ApiError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const Error& e) {
      const int status = e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kData ? 400 : 500;
      send_error(res, status, std::string(to_string(e.code())), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  session::SessionManager& sessions;
  ServerOptions options;
  httplib::Server http;

  Impl(session::SessionManager& s, ServerOptions o) : sessions(s), options(std::move(o)) {
    http.set_payload_max_length(sessions.options().upload_limit + 4096);
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, status_code_name(res.status),
                   "request failed with status " + std::to_string(res.status));
      }
    });
    if (options.ui_dir) http.set_mount_point("/", options.ui_dir->string());
    routes();
  }

  void routes() {
    http.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}, {"version", DIVCLUST_VERSION}});
    }));

    http.Post("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
      io::LoadOptions load;
      if (req.has_param("header")) load.header = truthy(req.get_param_value("header"));
      if (req.has_param("delimiter")) {
        const std::string d = req.get_param_value("delimiter");
        if (d == "tab") {
          load.delimiter = io::Delimiter::kTab;
        } else if (d == "comma") {
          load.delimiter = io::Delimiter::kComma;
        } else {
          throw ApiError(400, "bad_request", "delimiter must be 'comma' or 'tab'");
        }
      }
      if (req.has_param("label_column")) {
        const std::string v = req.get_param_value("label_column");
        std::size_t col = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), col);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
          throw ApiError(400, "bad_request", "label_column must be a column index");
        }
        load.label_column = col;
      }
      std::optional<std::string> name;
      if (req.has_param("name")) name = req.get_param_value("name");
      send_json(res, sessions.upload_dataset(req.body, load, name), 201);
    }));

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, sessions.create_session(parse_body(req)), 201);
    }));

    http.Get(R"(/sessions/([^/]+)/tree)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, sessions.get_tree(req.matches[1]));
             }));

    http.Get(R"(/sessions/([^/]+)/nodes/([^/]+)/view)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, sessions.get_node_view(req.matches[1], parse_node(req.matches[2])));
             }));

    http.Post(R"(/sessions/([^/]+)/nodes/([^/]+)/split)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string sid = req.matches[1];
                const tree::NodeId node = parse_node(req.matches[2]);
                const json body = parse_body(req);
                if (!body.is_object() || !body.contains("point") || !body.at("point").is_number()) {
                  throw ApiError(400, "bad_request", "body needs a numeric 'point'");
                }
                if (!body.contains("expected_revision") ||
                    !body.at("expected_revision").is_number_unsigned()) {
                  throw ApiError(400, "bad_request",
                                 "body needs a nonnegative integer 'expected_revision'");
                }
                send_json(res, sessions.set_split(sid, node, body.at("point").get<double>(),
                                                  body.at("expected_revision").get<std::uint64_t>()));
              }));

    http.Post(R"(/sessions/([^/]+)/reset)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                send_json(res, sessions.reset(req.matches[1]));
              }));

    http.Get(R"(/sessions/([^/]+)/dendrogram)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, sessions.dendrogram(req.matches[1]));
             }));

    http.Get(R"(/sessions/([^/]+)/log)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send_json(res, sessions.edit_log(req.matches[1]));
             }));
  }
};

HttpServer::HttpServer(session::SessionManager& sessions, ServerOptions options)
    : impl_(std::make_unique<Impl>(sessions, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->options.port == 0) {
    const int port = impl_->http.bind_to_any_port(impl_->options.host);
    require(port > 0, ErrorCode::kConfig, "could not bind " + impl_->options.host);
    impl_->options.port = port;
    return port;
  }
  require(impl_->http.bind_to_port(impl_->options.host, impl_->options.port), ErrorCode::kConfig,
          "could not bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  return impl_->options.port;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->http.stop();
}

bool HttpServer::running() const { return impl_->http.is_running(); }

}  // namespace divclust::server
