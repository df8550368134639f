// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Escalada Authors

#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "escalada/error.hpp"

namespace escalada {

/// Trailing-window ratio of OOV tokens to all tokens. One writer; readers may
/// query concurrently.
class OovRateMonitor {
 public:
  using Duration = std::chrono::milliseconds;
  using Timestamp = std::chrono::sys_time<Duration>;

  struct Status {
    double rate = 0.0;
    bool alarm = false;
    std::uint64_t oov_count = 0;
    std::uint64_t word_count = 0;
    std::size_t events = 0;
  };

  explicit OovRateMonitor(Duration window = std::chrono::hours(24), double threshold = 0.01,
                          Duration skew_tolerance = std::chrono::seconds(1))
      : window_(window), threshold_(threshold), skew_tolerance_(skew_tolerance) {
    if (window_ <= Duration::zero()) throw Error(ErrorKind::BadConfig, "window must be positive");
    if (!(threshold_ >= 0.0)) throw Error(ErrorKind::BadConfig, "threshold must be non-negative");
  }

  void record(Timestamp ts, std::uint64_t oov_count, std::uint64_t word_count) {
    if (oov_count > word_count) throw Error(ErrorKind::BadConfig, "oov_count exceeds word_count");
    std::unique_lock lock(mutex_);
    if (has_latest_ && ts + skew_tolerance_ < latest_) {
      throw Error(ErrorKind::ClockSkew, "timestamp regressed by " +
                                            std::to_string((latest_ - ts).count()) + " ms");
    }
    if (!has_latest_ || ts > latest_) latest_ = ts;
    has_latest_ = true;
    events_.push_back({ts, oov_count, word_count});
    oov_total_ += oov_count;
    word_total_ += word_count;
    evict(latest_);
  }

  /// Rate over the window ending at the newest recorded timestamp.
  Status status() const {
    std::shared_lock lock(mutex_);
    return has_latest_ ? compute(latest_) : Status{};
  }

  /// Rate over the window ending at `now`.
  Status status_at(Timestamp now) const {
    std::shared_lock lock(mutex_);
    return compute(now);
  }

  Duration window() const noexcept { return window_; }
  double threshold() const noexcept { return threshold_; }

 private:
  struct Event {
    Timestamp ts;
    std::uint64_t oov;
    std::uint64_t words;
  };

  bool in_window(const Event& e, Timestamp now) const { return e.ts > now - window_ && e.ts <= now + skew_tolerance_; }

  void evict(Timestamp now) {
    while (!events_.empty() && events_.front().ts <= now - window_) {
      oov_total_ -= events_.front().oov;
      word_total_ -= events_.front().words;
      events_.pop_front();
    }
  }

  Status compute(Timestamp now) const {
    Status s;
    for (const auto& e : events_) {
      if (!in_window(e, now)) continue;
      s.oov_count += e.oov;
      s.word_count += e.words;
      ++s.events;
    }
    s.rate = s.word_count == 0 ? 0.0 : static_cast<double>(s.oov_count) / static_cast<double>(s.word_count);
    s.alarm = s.rate > threshold_;
    return s;
  }

  Duration window_;
  double threshold_;
  Duration skew_tolerance_;
  mutable std::shared_mutex mutex_;
  std::deque<Event> events_;
  std::uint64_t oov_total_ = 0;
  std::uint64_t word_total_ = 0;
  Timestamp latest_{};
  bool has_latest_ = false;
};

}  // namespace escalada
