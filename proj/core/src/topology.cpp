#include "dflsim/topology.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dflsim/error.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {

TopologyGraph::TopologyGraph(int n) {
  if (n < 0) throw InvalidArgument("node count must be nonnegative");
  adj_.resize(static_cast<std::size_t>(n));
}

void TopologyGraph::check(NodeId v) const {
  if (v < 0 || v >= node_count()) throw InvalidArgument("node id " + std::to_string(v) + " out of range");
}

bool TopologyGraph::add_edge(NodeId a, NodeId b) {
  check(a);
  check(b);
  if (a == b) throw InvalidArgument("self-loop on node " + std::to_string(a));
  if (!adj_[a].insert(b).second) return false;
  adj_[b].insert(a);
  ++edges_;
  return true;
}

bool TopologyGraph::remove_edge(NodeId a, NodeId b) {
  check(a);
  check(b);
  if (adj_[a].erase(b) == 0) return false;
  adj_[b].erase(a);
  --edges_;
  return true;
}

bool TopologyGraph::has_edge(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return adj_[a].contains(b);
}

std::vector<NodeId> TopologyGraph::neighbors(NodeId v) const {
  check(v);
  return {adj_[v].begin(), adj_[v].end()};
}

int TopologyGraph::degree(NodeId v) const {
  check(v);
  return static_cast<int>(adj_[v].size());
}

std::vector<std::pair<NodeId, NodeId>> TopologyGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edges_);
  for (NodeId a = 0; a < node_count(); ++a) {
    for (NodeId b : adj_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

std::uint64_t TopologyGraph::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(node_count()));
  for (auto [a, b] : edges()) {
    feed(static_cast<std::uint64_t>(a));
    feed(static_cast<std::uint64_t>(b));
  }
  return h;
}

TopologyGraph fully_connected(int n) {
  if (n < 2) throw InvalidArgument("fully connected topology needs n >= 2");
  TopologyGraph g(n);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) g.add_edge(a, b);
  }
  return g;
}

TopologyGraph ring(int n) {
  if (n < 3) throw InvalidArgument("ring topology needs n >= 3");
  TopologyGraph g(n);
  for (NodeId a = 0; a < n; ++a) g.add_edge(a, (a + 1) % n);
  return g;
}

TopologyGraph star(int n, NodeId hub) {
  if (n < 2) throw InvalidArgument("star topology needs n >= 2");
  if (hub < 0 || hub >= n) throw InvalidArgument("star hub out of range");
  TopologyGraph g(n);
  for (NodeId v = 0; v < n; ++v) {
    if (v != hub) g.add_edge(hub, v);
  }
  return g;
}

TopologyGraph watts_strogatz(int n, int k, double p, std::uint64_t seed) {
  if (k < 2 || k % 2 != 0) throw InvalidArgument("watts_strogatz: k must be even and >= 2");
  if (n <= k) throw InvalidArgument("watts_strogatz: need n > k");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("watts_strogatz: p must be in [0,1]");

  TopologyGraph g(n);
  for (int j = 1; j <= k / 2; ++j) {
    for (NodeId u = 0; u < n; ++u) g.add_edge(u, (u + j) % n);
  }
  if (p == 0.0) return g;

  Engine rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int j = 1; j <= k / 2; ++j) {
    for (NodeId u = 0; u < n; ++u) {
      const NodeId v = (u + j) % n;
      if (coin(rng) >= p) continue;
      // Rewiring only applies to lattice edges still present.
      if (!g.has_edge(u, v)) continue;
      std::vector<NodeId> targets;
      for (NodeId w = 0; w < n; ++w) {
        if (w != u && !g.has_edge(u, w)) targets.push_back(w);
      }
      if (targets.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
      const NodeId w = targets[pick(rng)];
      g.remove_edge(u, v);
      g.add_edge(u, w);
    }
  }
  return g;
}

std::vector<double> malicious_exposure_pmf(int n, int m, int d) {
  if (n < 2) throw InvalidArgument("exposure: n must be >= 2");
  if (m < 0 || m > n - 1) throw InvalidArgument("exposure: need 0 <= m <= n-1");
  if (d < 1 || d > n - 1) throw InvalidArgument("exposure: need 1 <= d <= n-1");

  const int others = n - 1;
  auto log_choose = [](int a, int b) {
    return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  };
  std::vector<double> pmf(static_cast<std::size_t>(d) + 1, 0.0);
  const double log_denominator = log_choose(others, d);
  double total = 0.0;
  for (int x = 0; x <= d; ++x) {
    if (x > m || d - x > others - m) continue;
    pmf[x] = std::exp(log_choose(m, x) + log_choose(others - m, d - x) - log_denominator);
    total += pmf[x];
  }
  for (double& v : pmf) v /= total;
  return pmf;
}

}  // namespace dflsim
