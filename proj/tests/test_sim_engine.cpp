#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "vifusion/sim_engine.hpp"

using namespace vifusion;

TEST_CASE("virtual time advances to the earliest sleeper") {
  SimEngine eng;
  std::vector<std::pair<std::string, double>> log;
  eng.spawn("b", [&] {
    eng.sleep_for(2.0);
    log.emplace_back("b", eng.now());
  });
  eng.spawn("a", [&] {
    eng.sleep_for(1.0);
    log.emplace_back("a", eng.now());
    eng.sleep_for(3.0);
    log.emplace_back("a2", eng.now());
  });
  eng.run();
  REQUIRE(log.size() == 3);
  CHECK(log[0] == std::pair<std::string, double>{"a", 1.0});
  CHECK(log[1] == std::pair<std::string, double>{"b", 2.0});
  CHECK(log[2] == std::pair<std::string, double>{"a2", 4.0});
}

TEST_CASE("queue delivery respects timestamps and FIFO tie order") {
  SimEngine eng;
  SimQueue<int> q(eng);
  std::vector<std::pair<int, double>> got;
  eng.spawn("producer", [&] {
    q.push_at(2, 5.0);
    q.push_at(1, 1.0);
    q.push_at(3, 5.0);  // same timestamp as 2, pushed later
  });
  eng.spawn("consumer", [&] {
    int v = 0;
    while (q.pop(v, 10.0) == PopStatus::Ok) {
      got.emplace_back(v, eng.now());
      if (got.size() == 3) break;
    }
  });
  eng.run();
  REQUIRE(got.size() == 3);
  CHECK(got[0] == std::pair<int, double>{1, 1.0});
  CHECK(got[1] == std::pair<int, double>{2, 5.0});
  CHECK(got[2] == std::pair<int, double>{3, 5.0});
}

TEST_CASE("pop times out at the virtual deadline") {
  SimEngine eng;
  SimQueue<int> q(eng);
  PopStatus status = PopStatus::Ok;
  double woke_at = -1;
  eng.spawn("waiter", [&] {
    int v;
    status = q.pop(v, 2.5);
    woke_at = eng.now();
  });
  eng.run();
  CHECK(status == PopStatus::Timeout);
  CHECK(woke_at == 2.5);
}

TEST_CASE("deadlock without any pending event is detected") {
  SimEngine eng;
  SimQueue<int> q(eng);
  eng.spawn("stuck", [&] {
    int v;
    q.pop(v);  // no producer, no timeout
  });
  REQUIRE_THROWS_AS(eng.run(), DeadlockError);
}

TEST_CASE("daemons are closed out once regular actors finish") {
  SimEngine eng;
  SimQueue<int> q(eng);
  bool daemon_exited = false;
  int served = 0;
  eng.spawn(
      "server",
      [&] {
        int v;
        while (q.pop(v) == PopStatus::Ok) ++served;
        daemon_exited = true;
      },
      /*daemon=*/true);
  eng.spawn("client", [&] {
    q.push(1);
    q.push(2);
    eng.sleep_for(1.0);
  });
  eng.run();
  CHECK(served == 2);
  CHECK(daemon_exited);
}

TEST_CASE("actor errors surface from run") {
  SimEngine eng;
  eng.spawn("boom", [&] {
    eng.sleep_for(1.0);
    throw TimeoutError("boom at t=1");
  });
  eng.spawn("bystander", [&] { eng.sleep_for(5.0); });
  REQUIRE_THROWS_AS(eng.run(), TimeoutError);
}

TEST_CASE("identical programs give identical schedules") {
  auto trace = [] {
    SimEngine eng;
    SimQueue<int> a(eng), b(eng);
    std::vector<double> stamps;
    eng.spawn("x", [&] {
      for (int i = 0; i < 50; ++i) {
        a.push_at(i, eng.now() + 0.25);
        int v;
        if (b.pop(v, 3.0) == PopStatus::Ok) stamps.push_back(eng.now());
      }
    });
    eng.spawn("y", [&] {
      int v;
      while (a.pop(v, 5.0) == PopStatus::Ok) {
        eng.sleep_for(0.125);
        b.push_at(v, eng.now() + 0.5);
        stamps.push_back(eng.now());
      }
    });
    eng.run();
    return stamps;
  };
  REQUIRE(trace() == trace());
}
