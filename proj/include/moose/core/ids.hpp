#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>

namespace moose {

/// String identifier tagged by the kind of thing it names.
template <class Tag>
struct BasicId {
  std::string value;

  BasicId() = default;
  explicit BasicId(std::string v) : value(std::move(v)) {}

  bool empty() const noexcept { return value.empty(); }
  const std::string& str() const noexcept { return value; }

  friend auto operator<=>(const BasicId&, const BasicId&) = default;
  friend bool operator==(const BasicId&, const BasicId&) = default;
  friend std::ostream& operator<<(std::ostream& os, const BasicId& id) { return os << id.value; }
};

using NodeId = BasicId<struct NodeTag>;
using EventId = BasicId<struct EventTag>;
using InspirationId = BasicId<struct InspirationTag>;
using SessionId = BasicId<struct SessionTag>;

/// Millisecond clock. Live sessions use wall time; deterministic runs use a logical clock.
class Clock {
public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
public:
  std::int64_t now_ms() override;
};

/// Starts at `epoch_ms` and advances one millisecond per reading.
class LogicalClock final : public Clock {
public:
  explicit LogicalClock(std::int64_t epoch_ms) : next_(epoch_ms) {}
  std::int64_t now_ms() override;

private:
  std::mutex mu_;
  std::int64_t next_;
};

/// Issues lexicographically sortable ids: prefix, 13-digit timestamp, '-', 6-digit sequence.
/// Timestamps are clamped to be non-decreasing so string order matches issue order.
class IdGenerator {
public:
  explicit IdGenerator(std::shared_ptr<Clock> clock, std::uint64_t next_seq = 0)
      : clock_(std::move(clock)), seq_(next_seq) {}

  NodeId next_node() { return NodeId(next("n")); }
  EventId next_event() { return EventId(next("e")); }
  SessionId next_session() { return SessionId(next("s")); }
  std::int64_t timestamp() { return clock_->now_ms(); }

  /// Resumes after ids previously issued (used after restore).
  void observe(const std::string& id);

private:
  std::string next(const char* prefix);

  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::int64_t last_ms_ = 0;
  std::uint64_t seq_;
};

}  // namespace moose

template <class Tag>
struct std::hash<moose::BasicId<Tag>> {
  std::size_t operator()(const moose::BasicId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};
