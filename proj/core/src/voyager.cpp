#include "dflsim/voyager.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "dflsim/error.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {

void ReputationTable::observe(NodeId observer, NodeId observed, double similarity) {
  auto& e = entries_[{observer, observed}];
  ++e.count;
  e.mean += (similarity - e.mean) / static_cast<double>(e.count);
}

std::optional<ReputationTable::Entry> ReputationTable::get(NodeId observer, NodeId observed) const {
  auto it = entries_.find({observer, observed});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::set<NodeId> detect_anomalies(const ModelParams& own, std::span<const ReceivedModel> received, double tau) {
  std::set<NodeId> flagged;
  for (const auto& [id, model] : received) {
    require_same_arch(own, *model);
    if (cosine_similarity(own.values(), model->values()) < tau) flagged.insert(id);
  }
  return flagged;
}

std::vector<NodeId> explore_candidates(const TopologyGraph& topology, NodeId me, const ReputationTable& reputation,
                                       int k, std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("explore_candidates: k must be >= 1");
  std::vector<std::pair<double, NodeId>> observed;
  std::vector<NodeId> unobserved;
  for (NodeId v = 0; v < topology.node_count(); ++v) {
    if (v == me || topology.has_edge(me, v)) continue;
    if (auto e = reputation.get(me, v)) {
      observed.emplace_back(e->mean, v);
    } else {
      unobserved.push_back(v);
    }
  }
  std::sort(observed.begin(), observed.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  Engine rng(seed);
  std::shuffle(unobserved.begin(), unobserved.end(), rng);

  std::vector<NodeId> out;
  for (const auto& [score, v] : observed) out.push_back(v);
  out.insert(out.end(), unobserved.begin(), unobserved.end());
  if (out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
  return out;
}

TopologyGraph deploy_connections(const TopologyGraph& topology, NodeId me, const std::set<NodeId>& drop,
                                 std::span<const NodeId> add) {
  for (NodeId d : drop) {
    if (!topology.has_edge(me, d)) {
      throw InvalidArgument("cannot drop non-neighbour " + std::to_string(d) + " of node " + std::to_string(me));
    }
  }
  for (NodeId a : add) {
    if (a == me || topology.has_edge(me, a)) {
      throw InvalidArgument("cannot add node " + std::to_string(a) + " as a new neighbour of " +
                            std::to_string(me));
    }
  }
  TopologyGraph out = topology;
  for (NodeId d : drop) out.remove_edge(me, d);
  for (NodeId a : add) out.add_edge(me, a);
  return out;
}

}  // namespace dflsim
