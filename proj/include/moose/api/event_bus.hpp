#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "moose/core/json.hpp"

namespace moose::api {

enum class ProgressKind { GenerationStarted, NodeAdded, ScoreReady, RunCompleted, Error };

std::string_view to_string(ProgressKind k) noexcept;

struct ProgressEvent {
  SessionId session;
  std::uint64_t seq = 0;  // position in the session's feed
  ProgressKind kind = ProgressKind::GenerationStarted;
  Json payload;
};

/// Per-session ordered feeds. Subscribers hold a cursor and may read the full history from any
/// position, so late subscribers never miss what happened after their cursor.
class EventBus {
public:
  std::uint64_t publish(const SessionId& session, ProgressKind kind, Json payload);

  /// Position the next published event will take.
  std::uint64_t head(const SessionId& session) const;

  /// Events at positions >= `from`; waits up to `timeout` when there are none yet.
  std::vector<ProgressEvent> read(const SessionId& session, std::uint64_t from, std::chrono::milliseconds timeout);

  /// Wakes every reader; later reads return immediately.
  void close();
  bool closed() const;

private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<SessionId, std::vector<ProgressEvent>> feeds_;
  bool closed_ = false;
};

/// One server-sent-events frame.
std::string to_sse(const ProgressEvent& e);

}  // namespace moose::api
