#pragma once

#include <cstdlib>
#include <memory>
#include <shared_mutex>
#include <string>

#include <httplib.h>

#include "retrogate/service/store.hpp"

namespace retrogate::service {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8077;
  std::string token; // empty: no authentication
  std::string data_dir = "review_data";

  /// Reads REVIEW_ADDR (host:port), REVIEW_TOKEN and REVIEW_DATA_DIR.
  static ServerConfig from_env() {
    ServerConfig c;
    if (const char *addr = std::getenv("REVIEW_ADDR"))
      c.set_address(addr);
    if (const char *token = std::getenv("REVIEW_TOKEN"))
      c.token = token;
    if (const char *dir = std::getenv("REVIEW_DATA_DIR"))
      c.data_dir = dir;
    return c;
  }

  void set_address(const std::string &addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "address must be host:port, got '" + addr + "'");
    host = addr.substr(0, colon);
    try {
      port = std::stoi(addr.substr(colon + 1));
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::InvalidArgument, "bad port in '" + addr + "'");
    }
    if (port < 0 || port > 65535)
      throw Error(ErrorCode::InvalidArgument, "port out of range in '" + addr + "'");
  }
};

inline json error_json(const Error &e) {
  json j = {{"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
  if (e.offset())
    j["offset"] = *e.offset();
  return j;
}

inline int http_status(ErrorCode code) {
  switch (code) {
  case ErrorCode::NotFound: return 404;
  case ErrorCode::Unauthorized: return 401;
  case ErrorCode::ValidationFailed:
  case ErrorCode::ParseError:
  case ErrorCode::InvalidArgument: return 400;
  default: return 500;
  }
}

/// The /v1 review API over a ReviewStore. Reads share a lock; label
/// appends take it exclusively, so every read sees a whole write.
class ReviewServer {
public:
  explicit ReviewServer(ServerConfig config)
      : config_(std::move(config)), store_(std::make_unique<ReviewStore>(config_.data_dir)) {
    routes();
  }

  /// Binds and serves until stop(). Throws Io if the address is unavailable.
  void listen() {
    if (!server_.bind_to_port(config_.host, config_.port))
      throw Error(ErrorCode::Io, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    server_.listen_after_bind();
  }

  /// Binds an ephemeral port on the configured host and returns it.
  int bind_any_port() {
    const int port = server_.bind_to_any_port(config_.host);
    if (port < 0)
      throw Error(ErrorCode::Io, "cannot bind " + config_.host);
    return port;
  }
  void listen_after_bind() { server_.listen_after_bind(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

  ReviewStore &store() { return *store_; }

private:
  using Handler = std::function<json(const httplib::Request &, int &status)>;

  void handle(const char *method, const std::string &pattern, Handler h) {
    auto wrapped = [this, h](const httplib::Request &req, httplib::Response &res) {
      int status = 200;
      json body;
      try {
        authorize(req);
        body = h(req, status);
      } catch (const Error &e) {
        status = http_status(e.code());
        body = error_json(e);
      } catch (const json::exception &e) {
        status = 400;
        body = error_json(Error(ErrorCode::ParseError, e.what()));
      } catch (const std::exception &e) {
        status = 500;
        body = error_json(Error(ErrorCode::Io, e.what()));
      }
      res.status = status;
      res.set_content(body.dump(), "application/json");
    };
    if (std::string(method) == "GET")
      server_.Get(pattern, wrapped);
    else
      server_.Post(pattern, wrapped);
  }

  void authorize(const httplib::Request &req) const {
    if (config_.token.empty())
      return;
    if (req.get_header_value("Authorization") != "Bearer " + config_.token)
      throw Error(ErrorCode::Unauthorized, "missing or wrong bearer token");
  }

  void routes() {
    handle("GET", "/v1/routes", [this](const httplib::Request &, int &) {
      std::shared_lock lock(mutex_);
      return store_->list_routes();
    });
    handle("GET", R"(/v1/routes/([^/]+))", [this](const httplib::Request &req, int &) {
      std::shared_lock lock(mutex_);
      return store_->get_route(req.matches[1]);
    });
    handle("POST", R"(/v1/routes/([^/]+)/steps/(\d+)/label)", [this](const httplib::Request &req, int &status) {
      json payload;
      try {
        payload = json::parse(req.body);
      } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ParseError, "label body is not JSON", e.byte);
      }
      std::size_t step = 0;
      try {
        step = std::stoul(req.matches[2]);
      } catch (const std::logic_error &) {
        throw Error(ErrorCode::NotFound, "step index out of range");
      }
      std::unique_lock lock(mutex_);
      json stored = store_->post_label(req.matches[1], step, payload);
      status = 201;
      return stored;
    });
    handle("GET", "/v1/metrics", [this](const httplib::Request &, int &) {
      std::shared_lock lock(mutex_);
      return store_->metrics();
    });
    handle("GET", "/v1/progress", [this](const httplib::Request &, int &) {
      std::shared_lock lock(mutex_);
      return store_->progress();
    });
  }

  ServerConfig config_;
  std::unique_ptr<ReviewStore> store_;
  mutable std::shared_mutex mutex_;
  httplib::Server server_;
};

} // namespace retrogate::service
