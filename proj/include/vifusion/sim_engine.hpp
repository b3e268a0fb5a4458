#pragma once

#include <boost/context/continuation.hpp>
#include <boost/context/detail/exception.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "vifusion/error.hpp"
#include "vifusion/runtime.hpp"

namespace vifusion {

// Cooperative discrete-event engine. Actors are fibers multiplexed on the
// calling thread; virtual time advances only when every actor is blocked, to
// the earliest pending wake-up. Execution order is a pure function of the
// spawn order and the event timestamps, which is what makes simulated runs
// byte-reproducible.
//
// Rules: blocking calls (sleep/pop) may only be made from inside an actor;
// queues must outlive run(); daemon actors are interrupted with
// PopStatus::Closed once all non-daemon actors have finished.
class SimEngine {
 public:
  using ActorId = std::size_t;

  class WaitSource {
   public:
    virtual ~WaitSource() = default;
    virtual std::optional<double> earliest_ready() const = 0;
    virtual bool wait_closed() const = 0;
  };

  SimEngine() = default;
  SimEngine(const SimEngine&) = delete;
  SimEngine& operator=(const SimEngine&) = delete;

  ActorId spawn(std::string name, std::function<void()> fn,
                bool daemon = false) {
    auto actor = std::make_unique<Actor>();
    actor->id = actors_.size();
    actor->name = std::move(name);
    actor->daemon = daemon;
    actor->fn = std::move(fn);
    actor->state = State::Runnable;
    run_queue_.push_back(actor->id);
    actors_.push_back(std::move(actor));
    return actors_.back()->id;
  }

  double now() const { return now_; }
  std::uint64_t next_seq() { return seq_++; }
  bool shutting_down() const { return shutting_down_; }
  bool in_actor() const { return current_ != nullptr; }

  const std::string& current_actor_name() const {
    static const std::string none = "<none>";
    return current_ ? current_->name : none;
  }

  void sleep_until(double t) {
    Actor& a = require_actor("sleep_until");
    if (shutting_down_) return;
    a.state = State::Sleeping;
    a.wake_time = std::max(t, now_);
    yield(a);
  }

  void sleep_for(double dt) { sleep_until(now_ + dt); }

  /// Blocks the current actor on a wait source until it reports readiness,
  /// the deadline passes, or shutdown begins. Returns the wake reason; the
  /// caller rechecks its own condition and may wait again.
  enum class WakeReason { Ready, Timeout, Shutdown };
  WakeReason wait_on(WaitSource& source, double deadline) {
    Actor& a = require_actor("wait_on");
    if (shutting_down_ || source.wait_closed()) return WakeReason::Shutdown;
    if (now_ >= deadline) return WakeReason::Timeout;
    a.state = State::Waiting;
    a.wait_source = &source;
    a.deadline = deadline;
    yield(a);
    a.wait_source = nullptr;
    if (shutting_down_ || source.wait_closed()) return WakeReason::Shutdown;
    auto ready = source.earliest_ready();
    if (ready && *ready <= now_) return WakeReason::Ready;
    return now_ >= deadline ? WakeReason::Timeout : WakeReason::Ready;
  }

  /// Drives all actors to completion. Rethrows the first stored actor error
  /// (by spawn order). Throws DeadlockError if non-daemon actors are blocked
  /// with nothing that could ever wake them.
  void run() {
    if (in_actor()) throw Error("SimEngine::run called from an actor");
    while (true) {
      drain_runnable();
      if (all_non_daemons_done()) break;
      advance_clock();
    }
    shutting_down_ = true;
    for (int rounds = 0; rounds < 100000; ++rounds) {
      bool any = false;
      for (auto& a : actors_) {
        if (a->state == State::Sleeping || a->state == State::Waiting) {
          make_runnable(*a);
          any = true;
        }
      }
      drain_runnable();
      if (!any && run_queue_.empty()) break;
      if (all_done()) break;
    }
    for (const auto& a : actors_) {
      if (a->error) std::rethrow_exception(a->error);
    }
  }

 private:
  template <typename T>
  friend class SimQueue;

  enum class State { Runnable, Running, Sleeping, Waiting, Done };

  struct Actor {
    ActorId id = 0;
    std::string name;
    bool daemon = false;
    bool started = false;
    State state = State::Runnable;
    double wake_time = 0.0;
    double deadline = 0.0;
    WaitSource* wait_source = nullptr;
    std::function<void()> fn;
    boost::context::continuation cont;   // resumes the suspended actor
    boost::context::continuation sched;  // resumes the scheduler
    std::exception_ptr error;
  };

  Actor& require_actor(const char* op) {
    if (!current_) throw Error(std::string(op) + " outside of an actor");
    return *current_;
  }

  void yield(Actor& a) { a.sched = a.sched.resume(); }

  void make_runnable(Actor& a) {
    a.state = State::Runnable;
    run_queue_.push_back(a.id);
  }

  void resume(ActorId id) {
    Actor& a = *actors_[id];
    if (a.state != State::Runnable) return;
    a.state = State::Running;
    current_ = &a;
    if (!a.started) {
      a.started = true;
      a.cont = boost::context::callcc(
          [this, &a](boost::context::continuation&& sched) {
            a.sched = std::move(sched);
            try {
              a.fn();
            } catch (const boost::context::detail::forced_unwind&) {
              // stack is being torn down by ~continuation; must propagate
              a.state = State::Done;
              throw;
            } catch (...) {
              a.error = std::current_exception();
            }
            a.state = State::Done;
            return std::move(a.sched);
          });
    } else {
      a.cont = a.cont.resume();
    }
    current_ = nullptr;
  }

  void drain_runnable() {
    while (!run_queue_.empty()) {
      ActorId id = run_queue_.front();
      run_queue_.pop_front();
      resume(id);
    }
  }

  bool all_non_daemons_done() const {
    for (const auto& a : actors_) {
      if (!a->daemon && a->state != State::Done) return false;
    }
    return true;
  }

  bool all_done() const {
    for (const auto& a : actors_) {
      if (a->state != State::Done) return false;
    }
    return true;
  }

  void advance_clock() {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    double t = kInf;
    for (const auto& a : actors_) {
      switch (a->state) {
        case State::Sleeping:
          t = std::min(t, a->wake_time);
          break;
        case State::Waiting: {
          if (a->wait_source->wait_closed()) {
            t = std::min(t, now_);
            break;
          }
          if (auto ready = a->wait_source->earliest_ready()) {
            t = std::min(t, std::max(*ready, now_));
          }
          t = std::min(t, a->deadline);
          break;
        }
        default:
          break;
      }
    }
    if (t == kInf) {
      std::string blocked;
      for (const auto& a : actors_) {
        if (a->state == State::Waiting || a->state == State::Sleeping) {
          if (!blocked.empty()) blocked += ", ";
          blocked += a->name;
        }
      }
      throw DeadlockError("simulation deadlock; blocked actors: " + blocked);
    }
    now_ = std::max(now_, t);
    for (auto& a : actors_) {
      if (a->state == State::Sleeping && a->wake_time <= now_) {
        make_runnable(*a);
      } else if (a->state == State::Waiting) {
        const bool ready = [&] {
          if (a->wait_source->wait_closed()) return true;
          if (auto r = a->wait_source->earliest_ready(); r && *r <= now_)
            return true;
          return a->deadline <= now_;
        }();
        if (ready) make_runnable(*a);
      }
    }
  }

  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  bool shutting_down_ = false;
  std::vector<std::unique_ptr<Actor>> actors_;
  std::deque<ActorId> run_queue_;
  Actor* current_ = nullptr;
};

/// Timed delivery queue bound to a SimEngine. Items become visible to pop()
/// once the virtual clock reaches their delivery time; ties resolve in push
/// order. Single-threaded by construction.
template <typename T>
class SimQueue : public SimEngine::WaitSource {
 public:
  explicit SimQueue(SimEngine& engine) : engine_(engine) {}

  void push(T v) { push_at(std::move(v), engine_.now()); }

  void push_at(T v, double deliver_time) {
    Item item{std::max(deliver_time, engine_.now()), engine_.next_seq(),
              std::move(v)};
    heap_.push(std::move(item));
  }

  PopStatus pop(T& out, double timeout_s = -1.0) {
    const double deadline =
        timeout_s < 0 ? std::numeric_limits<double>::infinity()
                      : engine_.now() + timeout_s;
    while (true) {
      if (!heap_.empty() && heap_.top().t <= engine_.now()) {
        out = std::move(const_cast<Item&>(heap_.top()).v);
        heap_.pop();
        return PopStatus::Ok;
      }
      if (closed_ || engine_.shutting_down()) return PopStatus::Closed;
      if (engine_.now() >= deadline) return PopStatus::Timeout;
      auto reason = engine_.wait_on(*this, deadline);
      if (reason == SimEngine::WakeReason::Shutdown) return PopStatus::Closed;
      if (reason == SimEngine::WakeReason::Timeout &&
          (heap_.empty() || heap_.top().t > engine_.now())) {
        return PopStatus::Timeout;
      }
    }
  }

  std::optional<T> try_pop() {
    if (!heap_.empty() && heap_.top().t <= engine_.now()) {
      T v = std::move(const_cast<Item&>(heap_.top()).v);
      heap_.pop();
      return v;
    }
    return std::nullopt;
  }

  void close() { closed_ = true; }
  bool closed() const { return closed_; }
  std::size_t size() const { return heap_.size(); }

  std::optional<double> earliest_ready() const override {
    if (heap_.empty()) return std::nullopt;
    return heap_.top().t;
  }
  bool wait_closed() const override { return closed_; }

 private:
  struct Item {
    double t;
    std::uint64_t seq;
    T v;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.t != b.t) return a.t > b.t;
      return a.seq > b.seq;
    }
  };

  SimEngine& engine_;
  std::priority_queue<Item, std::vector<Item>, Later> heap_;
  bool closed_ = false;
};

/// Runtime adapter so shared library code can run inside simulated actors.
class SimRuntime : public Runtime {
 public:
  explicit SimRuntime(SimEngine& engine) : engine_(engine) {}
  double now() override { return engine_.now(); }
  void sleep_for(double seconds) override { engine_.sleep_for(seconds); }
  SimEngine& engine() { return engine_; }

 private:
  SimEngine& engine_;
};

}  // namespace vifusion
