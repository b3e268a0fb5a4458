#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "test_util.hpp"
#include "vifusion/shard_plan.hpp"

using namespace vifusion;

namespace {

// Independent brute force over all contiguous partitions, used as the oracle.
struct BruteResult {
  double objective;
  std::size_t transfer;
  std::vector<std::size_t> splits;
};

void brute_rec(const LayerProfile& p, double lambda, std::size_t remaining,
               std::size_t next, std::vector<std::size_t>& cur,
               BruteResult& best) {
  if (remaining == 0) {
    double maxc = 0.0;
    std::size_t b = 0, transfer = 0;
    for (std::size_t s = 0; s <= cur.size(); ++s) {
      std::size_t e = s < cur.size() ? cur[s] : p.num_layers();
      double c = 0;
      for (std::size_t i = b; i < e; ++i) c += p.compute_cost[i];
      maxc = std::max(maxc, c);
      b = e;
    }
    for (auto k : cur) transfer += p.activation_bytes[k - 1];
    double obj = maxc + lambda * static_cast<double>(transfer);
    bool better = obj < best.objective ||
                  (obj == best.objective && transfer < best.transfer) ||
                  (obj == best.objective && transfer == best.transfer &&
                   cur < best.splits);
    if (better) best = {obj, transfer, cur};
    return;
  }
  for (std::size_t k = next; k + remaining <= p.num_layers(); ++k) {
    cur.push_back(k);
    brute_rec(p, lambda, remaining - 1, k + 1, cur, best);
    cur.pop_back();
  }
}

BruteResult brute_force(const LayerProfile& p, std::size_t shards,
                        double lambda) {
  BruteResult best{1e300, 0, {}};
  std::vector<std::size_t> cur;
  brute_rec(p, lambda, shards - 1, 1, cur, best);
  return best;
}

LayerProfile random_profile(testutil::Rng& rng, std::size_t layers) {
  LayerProfile p;
  for (std::size_t i = 0; i < layers; ++i) {
    p.compute_cost.push_back(static_cast<double>(rng.uniform_int(1, 20)));
    p.activation_bytes.push_back(rng.uniform_int(1, 1 << 20));
  }
  return p;
}

}  // namespace

TEST_CASE("plan_shards picks the balanced low-transfer split") {
  LayerProfile p{{4, 1, 1, 4}, {10, 1, 10, 1}};
  ShardPlan plan = plan_shards(p, 2, 0.1);
  // candidates: split {1}: 6 + 1.0, {2}: 5 + 0.1, {3}: 6 + 1.0
  REQUIRE(plan.split_points == std::vector<std::size_t>{2});
  REQUIRE(plan.objective == Catch::Approx(5.1));
  REQUIRE(plan.per_shard_compute == std::vector<double>{5.0, 5.0});
  REQUIRE(plan.transfer_costs == std::vector<std::size_t>{1});
}

TEST_CASE("a single shard has no splits and total compute as objective") {
  LayerProfile p{{3, 7, 2}, {5, 5, 5}};
  ShardPlan plan = plan_shards(p, 1, 0.5);
  REQUIRE(plan.split_points.empty());
  REQUIRE(plan.objective == Catch::Approx(12.0));
}

TEST_CASE("uniform profile splits into equal contiguous runs") {
  LayerProfile p{std::vector<double>(8, 1.0),
                 std::vector<std::size_t>(8, 100)};
  ShardPlan plan = plan_shards(p, 4, 1e-6);
  REQUIRE(plan.split_points == std::vector<std::size_t>{2, 4, 6});
}

TEST_CASE("ties break on transfer then lexicographic splits") {
  // all 3-shard partitions of four unit layers have max compute 2
  LayerProfile p{{1, 1, 1, 1}, {5, 1, 5, 1}};
  SECTION("lambda 0: min transfer wins, then lex order") {
    // transfers: {1,2}: 6, {1,3}: 10, {2,3}: 6 -> {1,2} by lex
    ShardPlan plan = plan_shards(p, 3, 0.0);
    REQUIRE(plan.split_points == std::vector<std::size_t>{1, 2});
  }
  SECTION("positive lambda prefers the same min-transfer split") {
    ShardPlan plan = plan_shards(p, 3, 0.25);
    REQUIRE(plan.split_points == std::vector<std::size_t>{1, 2});
  }
}

TEST_CASE("plan_shards rejects bad inputs") {
  LayerProfile p{{1, 2}, {1, 1}};
  REQUIRE_THROWS_AS(plan_shards(p, 3), InvalidInputError);
  REQUIRE_THROWS_AS(plan_shards(p, 0), InvalidInputError);
  REQUIRE_THROWS_AS(plan_shards(LayerProfile{}, 1), InvalidInputError);
  REQUIRE_THROWS_AS(plan_shards(LayerProfile{{1, -1}, {1, 1}}, 1),
                    InvalidInputError);
  REQUIRE_THROWS_AS(plan_shards(LayerProfile{{1, 1}, {1}}, 1),
                    InvalidInputError);
}

TEST_CASE("planner equals brute force on random small profiles") {
  testutil::Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t layers = rng.uniform_int(1, 12);
    std::size_t shards = rng.uniform_int(1, std::min<std::size_t>(4, layers));
    double lambda = rng.uniform() * 2e-6;
    LayerProfile p = random_profile(rng, layers);
    ShardPlan plan = plan_shards(p, shards, lambda);
    BruteResult oracle = brute_force(p, shards, lambda);
    REQUIRE(plan.objective == oracle.objective);
    REQUIRE(plan.split_points == oracle.splits);
  }
}

TEST_CASE("DP route used for deep profiles matches brute force") {
  testutil::Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    std::size_t layers = 40;  // forces the cap-sweep DP path
    std::size_t shards = rng.uniform_int(2, 4);
    LayerProfile p = random_profile(rng, layers);
    ShardPlan plan = plan_shards(p, shards, 1e-6);
    BruteResult oracle = brute_force(p, shards, 1e-6);
    REQUIRE(plan.objective == oracle.objective);
    REQUIRE(plan.split_points == oracle.splits);
  }
}
