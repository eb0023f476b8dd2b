#include "moose/core/ids.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

namespace moose {

std::int64_t SystemClock::now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::int64_t LogicalClock::now_ms() {
  std::lock_guard lk(mu_);
  return next_++;
}

std::string IdGenerator::next(const char* prefix) {
  const std::int64_t now = clock_->now_ms();
  std::lock_guard lk(mu_);
  last_ms_ = std::max(last_ms_, now);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%013lld-%06llu", prefix, static_cast<long long>(last_ms_),
                static_cast<unsigned long long>(seq_++));
  return buf;
}

void IdGenerator::observe(const std::string& id) {
  // <prefix><13 digits>-<6 digits>
  if (id.size() < 21) return;
  const auto dash = id.rfind('-');
  if (dash == std::string::npos || dash < 13) return;
  try {
    const auto ms = std::stoll(id.substr(dash - 13, 13));
    const auto seq = std::stoull(id.substr(dash + 1));
    std::lock_guard lk(mu_);
    last_ms_ = std::max<std::int64_t>(last_ms_, ms);
    seq_ = std::max<std::uint64_t>(seq_, seq + 1);
  } catch (const std::exception&) {
  }
}

}  // namespace moose
