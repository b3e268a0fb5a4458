#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "vifusion/error.hpp"

namespace vifusion {

/// Per-layer compute cost (abstract units) and activation output size. Split
/// points are 1-based layer boundaries: a split at k separates layers
/// [0, k) from [k, num_layers), and ships activation_bytes[k-1] across it.
struct LayerProfile {
  std::vector<double> compute_cost;
  std::vector<std::size_t> activation_bytes;

  std::size_t num_layers() const { return compute_cost.size(); }
};

struct ShardPlan {
  std::vector<std::size_t> split_points;     // strictly increasing, in (0, L)
  std::vector<double> per_shard_compute;     // one entry per shard
  std::vector<std::size_t> transfer_costs;   // activation bytes per split
  double objective = 0.0;                    // max compute + lambda * transfer
};

namespace detail {

struct PlanCandidate {
  double objective;
  std::size_t total_transfer;
  std::vector<std::size_t> splits;

  bool better_than(const PlanCandidate& o) const {
    if (objective != o.objective) return objective < o.objective;
    if (total_transfer != o.total_transfer)
      return total_transfer < o.total_transfer;
    return splits < o.splits;
  }
};

inline PlanCandidate evaluate_splits(const LayerProfile& p,
                                     const std::vector<std::size_t>& splits,
                                     double lambda) {
  double max_compute = 0.0;
  std::size_t begin = 0;
  for (std::size_t s = 0; s <= splits.size(); ++s) {
    std::size_t end = (s < splits.size()) ? splits[s] : p.num_layers();
    double c = 0.0;
    for (std::size_t i = begin; i < end; ++i) c += p.compute_cost[i];
    max_compute = std::max(max_compute, c);
    begin = end;
  }
  std::size_t transfer = 0;
  for (std::size_t k : splits) transfer += p.activation_bytes[k - 1];
  return {max_compute + lambda * static_cast<double>(transfer), transfer,
          splits};
}

inline void enumerate_splits(const LayerProfile& p, double lambda,
                             std::size_t remaining, std::size_t next_pos,
                             std::vector<std::size_t>& current,
                             std::optional<PlanCandidate>& best) {
  if (remaining == 0) {
    PlanCandidate c = evaluate_splits(p, current, lambda);
    if (!best || c.better_than(*best)) best = std::move(c);
    return;
  }
  // leave room for the remaining splits
  for (std::size_t k = next_pos; k + remaining <= p.num_layers(); ++k) {
    current.push_back(k);
    enumerate_splits(p, lambda, remaining - 1, k + 1, current, best);
    current.pop_back();
  }
}

// Minimal-transfer contiguous partition of layers [i, L) into s shards, each
// with compute <= cap. Exact because the objective decomposes once the max
// shard compute is fixed; plan_shards sweeps candidate caps.
class CappedTransferDp {
 public:
  CappedTransferDp(const LayerProfile& p, double cap)
      : p_(p), cap_(cap), layers_(p.num_layers()) {
    prefix_.resize(layers_ + 1, 0.0);
    for (std::size_t i = 0; i < layers_; ++i)
      prefix_[i + 1] = prefix_[i] + p.compute_cost[i];
    memo_.assign((layers_ + 1) * (layers_ + 2), kUnset);
  }

  static constexpr double kInfeasible =
      std::numeric_limits<double>::infinity();

  // min transfer bytes for suffix [i, L) split into s shards; kInfeasible if
  // no such partition exists under the cap.
  double solve(std::size_t i, std::size_t s) {
    double& slot = memo_[i * (layers_ + 2) + s];
    if (slot != kUnset) return slot;
    double result = kInfeasible;
    if (i == layers_) {
      result = (s == 0) ? 0.0 : kInfeasible;
    } else if (s == 0) {
      result = kInfeasible;
    } else if (s == 1) {
      result = (prefix_[layers_] - prefix_[i] <= cap_) ? 0.0 : kInfeasible;
    } else {
      for (std::size_t j = i + 1; j + (s - 1) <= layers_; ++j) {
        if (prefix_[j] - prefix_[i] > cap_) break;
        double rest = solve(j, s - 1);
        if (rest == kInfeasible) continue;
        double t = static_cast<double>(p_.activation_bytes[j - 1]) + rest;
        result = std::min(result, t);
      }
    }
    slot = result;
    return result;
  }

  // Reconstructs the lexicographically smallest split set achieving solve().
  std::vector<std::size_t> reconstruct(std::size_t shards) {
    std::vector<std::size_t> splits;
    std::size_t i = 0;
    for (std::size_t s = shards; s > 1; --s) {
      double want = solve(i, s);
      for (std::size_t j = i + 1; j + (s - 1) <= layers_; ++j) {
        if (prefix_[j] - prefix_[i] > cap_) break;
        double rest = solve(j, s - 1);
        if (rest == kInfeasible) continue;
        if (static_cast<double>(p_.activation_bytes[j - 1]) + rest == want) {
          splits.push_back(j);
          i = j;
          break;
        }
      }
    }
    return splits;
  }

 private:
  static constexpr double kUnset = -1.0;
  const LayerProfile& p_;
  double cap_;
  std::size_t layers_;
  std::vector<double> prefix_;
  std::vector<double> memo_;
};

inline std::uint64_t split_combination_count(std::size_t layers,
                                             std::size_t shards) {
  // C(layers - 1, shards - 1), saturating
  std::uint64_t n = layers - 1, k = shards - 1, c = 1;
  k = std::min(k, n - k);
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (c > (1ULL << 40)) return c;  // enough to trip the fallback
    c = c * (n - k + i) / i;
  }
  return c;
}

}  // namespace detail

inline void validate(const LayerProfile& p) {
  if (p.compute_cost.empty()) {
    throw InvalidInputError("LayerProfile: no layers");
  }
  if (p.activation_bytes.size() != p.compute_cost.size()) {
    throw InvalidInputError(
        "LayerProfile: compute_cost and activation_bytes lengths differ");
  }
  for (double c : p.compute_cost) {
    if (c <= 0.0) throw InvalidInputError("LayerProfile: non-positive cost");
  }
  for (std::size_t b : p.activation_bytes) {
    if (b == 0) throw InvalidInputError("LayerProfile: zero activation size");
  }
}

/// Picks split points minimizing max-shard-compute + lambda * bytes crossing
/// the splits. Exhaustive over split combinations for small profiles,
/// contiguous-partition DP (a sweep over candidate compute caps) above that.
/// Ties break toward smaller total transfer, then lexicographically smaller
/// split points. lambda defaults to 1 cost unit per MB of activations.
inline ShardPlan plan_shards(const LayerProfile& profile, std::size_t n_shards,
                             double lambda = 1e-6) {
  validate(profile);
  const std::size_t layers = profile.num_layers();
  if (n_shards == 0) throw InvalidInputError("plan_shards: zero shards");
  if (n_shards > layers) {
    throw InvalidInputError("plan_shards: " + std::to_string(n_shards) +
                            " shards for " + std::to_string(layers) +
                            " layers");
  }

  std::optional<detail::PlanCandidate> best;
  const bool small = layers <= 32 &&
                     detail::split_combination_count(layers, n_shards) <=
                         (std::uint64_t{1} << 22);
  if (small) {
    std::vector<std::size_t> current;
    detail::enumerate_splits(profile, lambda, n_shards - 1, 1, current, best);
  } else {
    // Candidate caps are the contiguous segment compute sums; the optimum's
    // max shard compute is always one of them.
    std::vector<double> prefix(layers + 1, 0.0);
    for (std::size_t i = 0; i < layers; ++i)
      prefix[i + 1] = prefix[i] + profile.compute_cost[i];
    std::vector<double> caps;
    caps.reserve(layers * (layers + 1) / 2);
    for (std::size_t i = 0; i < layers; ++i)
      for (std::size_t j = i + 1; j <= layers; ++j)
        caps.push_back(prefix[j] - prefix[i]);
    std::sort(caps.begin(), caps.end());
    caps.erase(std::unique(caps.begin(), caps.end()), caps.end());

    for (double cap : caps) {
      if (best && cap >= best->objective) break;  // objective >= cap
      detail::CappedTransferDp dp(profile, cap);
      if (dp.solve(0, n_shards) == detail::CappedTransferDp::kInfeasible)
        continue;
      auto splits = dp.reconstruct(n_shards);
      detail::PlanCandidate c =
          detail::evaluate_splits(profile, splits, lambda);
      if (!best || c.better_than(*best)) best = std::move(c);
    }
  }

  ShardPlan plan;
  plan.split_points = best->splits;
  plan.objective = best->objective;
  std::size_t begin = 0;
  for (std::size_t s = 0; s <= plan.split_points.size(); ++s) {
    std::size_t end =
        (s < plan.split_points.size()) ? plan.split_points[s] : layers;
    plan.per_shard_compute.push_back(std::accumulate(
        profile.compute_cost.begin() + begin,
        profile.compute_cost.begin() + end, 0.0));
    begin = end;
  }
  for (std::size_t k : plan.split_points) {
    plan.transfer_costs.push_back(profile.activation_bytes[k - 1]);
  }
  return plan;
}

}  // namespace vifusion
