#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "moose/explore/engine.hpp"
#include "moose/llm/backend.hpp"
#include "moose/llm/gateway.hpp"
#include "moose/refine/engine.hpp"

namespace moose::api {

struct ServiceOptions {
  std::filesystem::path data_dir = "moose-data";
  std::shared_ptr<Clock> clock = std::make_shared<SystemClock>();
  /// Used when a session is created without llm_config, and for sessions restored from disk
  /// (credentials are never persisted). Empty: fall back to the MOOSE_API_* environment.
  llm::BackendFactory default_backend;
  llm::LlmGateway::Options gateway;
  explore::ExploreConfig explore;
  refine::RefineConfig refine;
  std::optional<std::filesystem::path> static_dir;  // served at "/" when set
  std::chrono::milliseconds stream_heartbeat{250};

  /// MOOSE_DATA_DIR; the listen address is read separately by listen_addr_from_env().
  static ServiceOptions from_env();
};

/// host and port from MOOSE_LISTEN_ADDR ("host:port"), default 127.0.0.1:8080.
std::pair<std::string, int> listen_addr_from_env();

/// HTTP front end over sessions, engines, ranking, routing and feedback.
class Service {
public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  /// Stops accepting requests, closes event streams and joins running jobs.
  void stop();
  /// Blocks until no engine job is running.
  void wait_idle();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace moose::api
