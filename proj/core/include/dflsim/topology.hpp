#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace dflsim {

using NodeId = int;

/// Simple undirected graph over node ids 0..n-1.
class TopologyGraph {
 public:
  TopologyGraph() = default;
  explicit TopologyGraph(int n);

  int node_count() const { return static_cast<int>(adj_.size()); }
  std::size_t edge_count() const { return edges_; }

  /// Throws InvalidArgument on self-loops or out-of-range ids; duplicate
  /// insertions are ignored and report false.
  bool add_edge(NodeId a, NodeId b);
  bool remove_edge(NodeId a, NodeId b);
  bool has_edge(NodeId a, NodeId b) const;

  /// Sorted ascending.
  std::vector<NodeId> neighbors(NodeId v) const;
  int degree(NodeId v) const;
  /// Each edge once as (low, high), sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  /// FNV-1a over the sorted edge list; stable across runs and platforms.
  std::uint64_t hash() const;

  friend bool operator==(const TopologyGraph&, const TopologyGraph&) = default;

 private:
  void check(NodeId v) const;

  std::vector<std::set<NodeId>> adj_;
  std::size_t edges_ = 0;
};

TopologyGraph fully_connected(int n);
TopologyGraph ring(int n);
TopologyGraph star(int n, NodeId hub);

/// Ring lattice with k/2 neighbours per side, each lattice edge's far endpoint
/// rewired with probability p to a uniformly chosen node that is neither the
/// near endpoint nor already adjacent to it. Edge count stays n*k/2.
TopologyGraph watts_strogatz(int n, int k, double p, std::uint64_t seed);

/// P(X = x), x = 0..d, for the number of malicious nodes among d neighbours drawn
/// without replacement from the n-1 other nodes of which m are malicious.
std::vector<double> malicious_exposure_pmf(int n, int m, int d);

}  // namespace dflsim
