#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "dflsim/params.hpp"
#include "dflsim/topology.hpp"

namespace dflsim {

/// Running mean of the cosine similarity each observer has seen between its
/// own model and the models shared by each observed node.
class ReputationTable {
 public:
  struct Entry {
    double mean = 0.0;
    std::int64_t count = 0;
  };

  void observe(NodeId observer, NodeId observed, double similarity);
  std::optional<Entry> get(NodeId observer, NodeId observed) const;

 private:
  std::map<std::pair<NodeId, NodeId>, Entry> entries_;
};

using ReceivedModel = std::pair<NodeId, const ModelParams*>;

/// Nodes whose shared model has flattened cosine similarity below `tau` with `own`.
std::set<NodeId> detect_anomalies(const ModelParams& own, std::span<const ReceivedModel> received, double tau);

/// Up to k non-neighbours of `me`, best reputation first; nodes `me` has never
/// observed follow in seeded random order.
std::vector<NodeId> explore_candidates(const TopologyGraph& topology, NodeId me, const ReputationTable& reputation,
                                       int k, std::uint64_t seed);

/// New graph with (me, d) removed for every d in `drop` and (me, a) added for
/// every a in `add`. Throws InvalidArgument if `drop` contains a non-neighbour
/// or `add` contains `me` or a current neighbour.
TopologyGraph deploy_connections(const TopologyGraph& topology, NodeId me, const std::set<NodeId>& drop,
                                 std::span<const NodeId> add);

}  // namespace dflsim
