#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vifusion/error.hpp"

namespace vifusion {

using NodeId = std::uint32_t;
using RackId = std::uint32_t;

/// Rack id used for nodes that live above the racks (core switch, core
/// aggregator). Such nodes belong to no rack.
inline constexpr RackId kCoreTier = 0xffffffffu;

struct TopologyNode {
  NodeId node_id = 0;
  RackId rack_id = kCoreTier;
};

struct Link {
  NodeId endpoint_a = 0;
  NodeId endpoint_b = 0;
  double bandwidth_bits_per_s = 0.0;
  double latency_s = 0.0;
};

enum class AggTier { Rack, Core };

struct Aggregator {
  NodeId node_id = 0;
  AggTier tier = AggTier::Rack;
};

/// Tree-shaped multi-tier network: nodes hang off top-of-rack switches which
/// hang off one core switch. Aggregation nodes are declared explicitly, one
/// per occupied rack plus one at the core tier.
class Topology {
 public:
  std::vector<TopologyNode> nodes;
  std::vector<Link> links;
  std::vector<Aggregator> aggregators;

  bool has_node(NodeId id) const { return index_.count(id) != 0; }

  RackId rack_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw InvalidInputError("unknown node " + std::to_string(id));
    }
    return nodes[it->second].rack_id;
  }

  std::optional<NodeId> rack_aggregator(RackId rack) const {
    auto it = rack_agg_.find(rack);
    if (it == rack_agg_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<NodeId> core_aggregator() const { return core_agg_; }

  const std::vector<std::pair<NodeId, std::size_t>>& neighbors(
      NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
      throw InvalidInputError("unknown node " + std::to_string(id));
    }
    return adjacency_[it->second];
  }

  /// Link indices along the unique tree path src -> dst (empty when
  /// src == dst). Throws UnreachableError when no path exists.
  std::vector<std::size_t> path(NodeId src, NodeId dst) const {
    if (!has_node(src) || !has_node(dst)) {
      throw UnreachableError("path endpoints not in topology");
    }
    if (src == dst) return {};
    std::map<NodeId, std::pair<NodeId, std::size_t>> parent;
    std::deque<NodeId> frontier{src};
    parent[src] = {src, 0};
    while (!frontier.empty()) {
      NodeId cur = frontier.front();
      frontier.pop_front();
      if (cur == dst) break;
      for (const auto& [next, link_idx] : neighbors(cur)) {
        if (parent.count(next)) continue;
        parent[next] = {cur, link_idx};
        frontier.push_back(next);
      }
    }
    if (!parent.count(dst)) {
      throw UnreachableError("no path between " + std::to_string(src) +
                             " and " + std::to_string(dst));
    }
    std::vector<std::size_t> hops;
    for (NodeId cur = dst; cur != src; cur = parent[cur].first) {
      hops.push_back(parent[cur].second);
    }
    std::reverse(hops.begin(), hops.end());
    return hops;
  }

  /// Uncontended store-and-forward estimate: per hop, latency plus
  /// transmission time for the full payload.
  double estimate_transfer_time(NodeId src, NodeId dst,
                                std::size_t bytes) const {
    double total = 0.0;
    for (std::size_t idx : path(src, dst)) {
      const Link& l = links[idx];
      total += l.latency_s +
               8.0 * static_cast<double>(bytes) / l.bandwidth_bits_per_s;
    }
    return total;
  }

  /// Rebuilds indices and checks structural invariants: unique ids, links
  /// between known nodes, a connected tree, at most one aggregator per rack
  /// and one at the core, each on a matching node.
  void validate() {
    index_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!index_.emplace(nodes[i].node_id, i).second) {
        throw ConfigError("duplicate node id " +
                          std::to_string(nodes[i].node_id));
      }
    }
    if (nodes.empty()) throw ConfigError("topology has no nodes");
    adjacency_.assign(nodes.size(), {});
    for (std::size_t i = 0; i < links.size(); ++i) {
      const Link& l = links[i];
      auto a = index_.find(l.endpoint_a);
      auto b = index_.find(l.endpoint_b);
      if (a == index_.end() || b == index_.end()) {
        throw ConfigError("link references unknown node");
      }
      if (l.bandwidth_bits_per_s <= 0 || l.latency_s < 0) {
        throw ConfigError("link must have positive bandwidth and "
                          "non-negative latency");
      }
      adjacency_[a->second].emplace_back(l.endpoint_b, i);
      adjacency_[b->second].emplace_back(l.endpoint_a, i);
    }
    if (links.size() + 1 != nodes.size()) {
      throw ConfigError("topology must be a tree (|links| = |nodes| - 1)");
    }
    // connectivity via BFS from the first node
    std::set<NodeId> seen{nodes[0].node_id};
    std::deque<NodeId> frontier{nodes[0].node_id};
    while (!frontier.empty()) {
      NodeId cur = frontier.front();
      frontier.pop_front();
      for (const auto& [next, idx] : neighbors(cur)) {
        if (seen.insert(next).second) frontier.push_back(next);
      }
    }
    if (seen.size() != nodes.size()) {
      throw ConfigError("topology link graph is not connected");
    }
    rack_agg_.clear();
    core_agg_.reset();
    for (const auto& agg : aggregators) {
      if (!has_node(agg.node_id)) {
        throw ConfigError("aggregator node " + std::to_string(agg.node_id) +
                          " not declared in nodes");
      }
      if (agg.tier == AggTier::Core) {
        if (core_agg_) throw ConfigError("multiple core aggregators");
        core_agg_ = agg.node_id;
      } else {
        RackId rack = rack_of(agg.node_id);
        if (rack == kCoreTier) {
          throw ConfigError("rack aggregator on a core-tier node");
        }
        if (!rack_agg_.emplace(rack, agg.node_id).second) {
          throw ConfigError("multiple aggregators for rack " +
                            std::to_string(rack));
        }
      }
    }
  }

 private:
  std::map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> adjacency_;
  std::map<RackId, NodeId> rack_agg_;
  std::optional<NodeId> core_agg_;
};

/// Racks to ordered worker lists plus the aggregation node serving each
/// group and the core-tier meeting point.
struct GroupAssignment {
  std::map<RackId, std::vector<NodeId>> groups;
  std::map<RackId, NodeId> leaders;
  NodeId core_leader = 0;

  std::size_t worker_count() const {
    std::size_t n = 0;
    for (const auto& [rack, members] : groups) n += members.size();
    return n;
  }

  std::vector<NodeId> all_workers() const {
    std::vector<NodeId> out;
    for (const auto& [rack, members] : groups) {
      out.insert(out.end(), members.begin(), members.end());
    }
    return out;
  }

  RackId rack_of_worker(NodeId id) const {
    for (const auto& [rack, members] : groups) {
      for (NodeId w : members) {
        if (w == id) return rack;
      }
    }
    throw InvalidInputError("node " + std::to_string(id) +
                            " is not a worker in this assignment");
  }
};

/// Groups workers by their rack. Leaders are the racks' aggregation nodes;
/// the core leader is the core aggregator (or the single rack's aggregator
/// when only one rack is occupied, where the core stage degenerates).
inline GroupAssignment partition_groups(const Topology& topo,
                                        const std::vector<NodeId>& workers) {
  if (workers.empty()) {
    throw InvalidInputError("partition_groups: empty worker list");
  }
  GroupAssignment out;
  std::set<NodeId> seen;
  for (NodeId w : workers) {
    if (!topo.has_node(w)) {
      throw InvalidInputError("worker " + std::to_string(w) +
                              " not in topology");
    }
    if (!seen.insert(w).second) {
      throw InvalidInputError("worker " + std::to_string(w) +
                              " listed twice");
    }
    RackId rack = topo.rack_of(w);
    if (rack == kCoreTier) {
      throw ConfigError("worker " + std::to_string(w) +
                        " is a core-tier node");
    }
    out.groups[rack].push_back(w);
  }
  for (const auto& [rack, members] : out.groups) {
    auto agg = topo.rack_aggregator(rack);
    if (!agg) {
      throw ConfigError("rack " + std::to_string(rack) +
                        " has workers but no aggregation node");
    }
    out.leaders[rack] = *agg;
  }
  if (out.groups.size() >= 2) {
    auto core = topo.core_aggregator();
    if (!core) {
      throw ConfigError("multi-rack assignment requires a core aggregator");
    }
    out.core_leader = *core;
  } else {
    out.core_leader = out.leaders.begin()->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// topology file format: JSON object with nodes / links / aggregators arrays.
// Core-tier nodes carry "rack_id": null. Bandwidths in bits/s, latencies in
// seconds.

inline Topology parse_topology(const nlohmann::json& j) {
  Topology topo;
  try {
    for (const auto& n : j.at("nodes")) {
      TopologyNode node;
      node.node_id = n.at("node_id").get<NodeId>();
      node.rack_id = n.at("rack_id").is_null() ? kCoreTier
                                               : n.at("rack_id").get<RackId>();
      topo.nodes.push_back(node);
    }
    for (const auto& l : j.at("links")) {
      Link link;
      link.endpoint_a = l.at("endpoint_a").get<NodeId>();
      link.endpoint_b = l.at("endpoint_b").get<NodeId>();
      link.bandwidth_bits_per_s = l.at("bandwidth_bits_per_s").get<double>();
      link.latency_s = l.at("latency_s").get<double>();
      topo.links.push_back(link);
    }
    for (const auto& a : j.at("aggregators")) {
      Aggregator agg;
      agg.node_id = a.at("node_id").get<NodeId>();
      const std::string tier = a.at("tier").get<std::string>();
      if (tier == "rack") {
        agg.tier = AggTier::Rack;
      } else if (tier == "core") {
        agg.tier = AggTier::Core;
      } else {
        throw ConfigError("aggregator tier must be \"rack\" or \"core\"");
      }
      topo.aggregators.push_back(agg);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed topology file: ") + e.what());
  }
  topo.validate();
  return topo;
}

inline nlohmann::json topology_to_json(const Topology& topo) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : topo.nodes) {
    nlohmann::json node;
    node["node_id"] = n.node_id;
    if (n.rack_id == kCoreTier) {
      node["rack_id"] = nullptr;
    } else {
      node["rack_id"] = n.rack_id;
    }
    j["nodes"].push_back(node);
  }
  j["links"] = nlohmann::json::array();
  for (const auto& l : topo.links) {
    j["links"].push_back({{"endpoint_a", l.endpoint_a},
                          {"endpoint_b", l.endpoint_b},
                          {"bandwidth_bits_per_s", l.bandwidth_bits_per_s},
                          {"latency_s", l.latency_s}});
  }
  j["aggregators"] = nlohmann::json::array();
  for (const auto& a : topo.aggregators) {
    j["aggregators"].push_back(
        {{"node_id", a.node_id},
         {"tier", a.tier == AggTier::Core ? "core" : "rack"}});
  }
  return j;
}

inline Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open topology file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("topology file is not valid JSON: ") +
                      e.what());
  }
  return parse_topology(j);
}

/// Parameters for the stock two-tier topology used by tests and benchmarks.
struct TwoTierParams {
  double intra_bandwidth_bps = 100e9;  // worker/aggregator <-> ToR
  double intra_latency_s = 1e-6;
  double inter_bandwidth_bps = 10e9;  // ToR <-> core switch
  double inter_latency_s = 1e-5;
};

/// Node numbering: workers 0..R*W-1 (rack-major), ToR switch 1000+r, rack
/// aggregator 2000+r, core switch 3000, core aggregator 3001 (core tier only
/// present when racks >= 2).
inline Topology make_two_tier_topology(std::size_t racks,
                                       std::size_t workers_per_rack,
                                       const TwoTierParams& p = {}) {
  if (racks == 0 || workers_per_rack == 0) {
    throw InvalidInputError("topology needs at least one rack and worker");
  }
  Topology topo;
  for (std::size_t r = 0; r < racks; ++r) {
    const NodeId tor = static_cast<NodeId>(1000 + r);
    const NodeId agg = static_cast<NodeId>(2000 + r);
    topo.nodes.push_back({tor, static_cast<RackId>(r)});
    topo.nodes.push_back({agg, static_cast<RackId>(r)});
    topo.aggregators.push_back({agg, AggTier::Rack});
    topo.links.push_back(
        {agg, tor, p.intra_bandwidth_bps, p.intra_latency_s});
    for (std::size_t w = 0; w < workers_per_rack; ++w) {
      const NodeId worker = static_cast<NodeId>(r * workers_per_rack + w);
      topo.nodes.push_back({worker, static_cast<RackId>(r)});
      topo.links.push_back(
          {worker, tor, p.intra_bandwidth_bps, p.intra_latency_s});
    }
  }
  if (racks >= 2) {
    const NodeId core_switch = 3000;
    const NodeId core_agg = 3001;
    topo.nodes.push_back({core_switch, kCoreTier});
    topo.nodes.push_back({core_agg, kCoreTier});
    topo.aggregators.push_back({core_agg, AggTier::Core});
    topo.links.push_back({core_agg, core_switch, p.intra_bandwidth_bps,
                          p.intra_latency_s});
    for (std::size_t r = 0; r < racks; ++r) {
      topo.links.push_back({static_cast<NodeId>(1000 + r), core_switch,
                            p.inter_bandwidth_bps, p.inter_latency_s});
    }
  }
  topo.validate();
  return topo;
}

/// Worker-capable nodes: rack-resident tree leaves that are not aggregation
/// nodes. Switches are interior nodes and never qualify.
inline std::vector<NodeId> worker_nodes(const Topology& topo) {
  std::set<NodeId> agg_nodes;
  for (const auto& a : topo.aggregators) agg_nodes.insert(a.node_id);
  std::vector<NodeId> out;
  for (const auto& node : topo.nodes) {
    if (node.rack_id == kCoreTier) continue;
    if (agg_nodes.count(node.node_id)) continue;
    if (topo.neighbors(node.node_id).size() != 1) continue;
    out.push_back(node.node_id);
  }
  return out;
}

/// Picks n workers spread round-robin across racks (racks in id order,
/// workers within a rack in id order). Used by the benchmark harness so small
/// worker counts still exercise the inter-rack tier.
inline std::vector<NodeId> select_workers(const Topology& topo,
                                          std::size_t n) {
  std::map<RackId, std::deque<NodeId>> per_rack;
  for (NodeId w : worker_nodes(topo)) {
    per_rack[topo.rack_of(w)].push_back(w);
  }
  for (auto& [rack, ids] : per_rack) {
    std::sort(ids.begin(), ids.end());
  }
  std::vector<NodeId> out;
  while (out.size() < n) {
    bool any = false;
    for (auto& [rack, ids] : per_rack) {
      if (ids.empty()) continue;
      out.push_back(ids.front());
      ids.pop_front();
      any = true;
      if (out.size() == n) break;
    }
    if (!any) {
      throw ConfigError("topology supports only " +
                        std::to_string(out.size()) + " workers, need " +
                        std::to_string(n));
    }
  }
  return out;
}

}  // namespace vifusion
