#include "moose/api/event_bus.hpp"

namespace moose::api {

std::string_view to_string(ProgressKind k) noexcept {
  switch (k) {
    case ProgressKind::GenerationStarted: return "GenerationStarted";
    case ProgressKind::NodeAdded: return "NodeAdded";
    case ProgressKind::ScoreReady: return "ScoreReady";
    case ProgressKind::RunCompleted: return "RunCompleted";
    case ProgressKind::Error: return "Error";
  }
  return "?";
}

std::uint64_t EventBus::publish(const SessionId& session, ProgressKind kind, Json payload) {
  std::uint64_t seq;
  {
    std::lock_guard lock(mu_);
    auto& feed = feeds_[session];
    seq = feed.size();
    feed.push_back(ProgressEvent{session, seq, kind, std::move(payload)});
  }
  cv_.notify_all();
  return seq;
}

std::uint64_t EventBus::head(const SessionId& session) const {
  std::lock_guard lock(mu_);
  auto it = feeds_.find(session);
  return it == feeds_.end() ? 0 : it->second.size();
}

std::vector<ProgressEvent> EventBus::read(const SessionId& session, std::uint64_t from,
                                          std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  auto available = [&] {
    auto it = feeds_.find(session);
    return closed_ || (it != feeds_.end() && it->second.size() > from);
  };
  cv_.wait_for(lock, timeout, available);
  std::vector<ProgressEvent> out;
  auto it = feeds_.find(session);
  if (it != feeds_.end())
    for (auto i = from; i < it->second.size(); ++i) out.push_back(it->second[i]);
  return out;
}

void EventBus::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool EventBus::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::string to_sse(const ProgressEvent& e) {
  Json data = e.payload;
  data["session"] = e.session;
  data["seq"] = e.seq;
  return "id: " + std::to_string(e.seq) + "\nevent: " + std::string(to_string(e.kind)) + "\ndata: " + data.dump() +
         "\n\n";
}

}  // namespace moose::api
