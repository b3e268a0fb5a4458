#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace vifusion {

/// Result of a blocking queue pop.
enum class PopStatus { Ok, Timeout, Closed };

/// Clock and sleep services seen by library code that runs both on the
/// simulated virtual clock and on the wall clock. now() is in seconds.
class Runtime {
 public:
  virtual ~Runtime() = default;
  virtual double now() = 0;
  virtual void sleep_for(double seconds) = 0;
};

/// Wall-clock runtime backed by std::chrono. Thread-safe.
class RealRuntime : public Runtime {
 public:
  double now() override {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
  void sleep_for(double seconds) override {
    if (seconds > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    }
  }
};

/// Plain blocking MPMC queue used by the real backend.
template <typename T>
class RealQueue {
 public:
  void push(T v) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      items_.push_back(std::move(v));
    }
    cv_.notify_all();
  }

  PopStatus pop(T& out, double timeout_s = -1.0) {
    std::unique_lock<std::mutex> lock(mutex_);
    auto ready = [&] { return closed_ || !items_.empty(); };
    if (timeout_s < 0) {
      cv_.wait(lock, ready);
    } else if (!cv_.wait_for(lock, std::chrono::duration<double>(timeout_s),
                             ready)) {
      return PopStatus::Timeout;
    }
    if (!items_.empty()) {
      out = std::move(items_.front());
      items_.pop_front();
      return PopStatus::Ok;
    }
    return PopStatus::Closed;
  }

  std::optional<T> try_pop() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  bool closed() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return closed_;
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Joins a set of worker threads on destruction; the real-backend counterpart
/// of spawning simulated actors.
class ThreadGroup {
 public:
  ~ThreadGroup() { join_all(); }

  void spawn(std::function<void()> fn) { threads_.emplace_back(std::move(fn)); }

  void join_all() {
    for (auto& t : threads_) {
      if (t.joinable()) t.join();
    }
    threads_.clear();
  }

 private:
  std::vector<std::thread> threads_;
};

}  // namespace vifusion
